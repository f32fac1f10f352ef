#pragma once

#include <array>
#include <string>
#include <vector>

#include "fnls/multi_index.hpp"
#include "fnls/problem.hpp"

namespace fnls {

using SpatialPoint = std::array<int, kMaxSpatialDim>;

// |n - n'|_1 + | |n|_2^2 - |n'|_2^2 |
double separation_value(const SpatialPoint& a, const SpatialPoint& b, int d);

struct SeparationPartition {
  int dim = 1;
  double B = 1.0;
  int box_radius = 0;
  std::vector<SpatialPoint> points;   // cube [-R,R]^d, lexicographic
  std::vector<int> class_of;          // per point
  std::vector<std::vector<int>> classes;  // labelled by smallest member
  std::vector<int> diameter;          // l1 diameter per class
  double diameter_bound() const;      // B^{Ctilde_d}
  int max_diameter() const;
  int class_of_point(std::span<const int> n) const;
  // Exhaustive pairwise check of the separation property and of the cover.
  bool verify_exhaustive(std::string* why = nullptr) const;
  // min separation value from each class to any other class (O(P^2))
  std::vector<double> nearest_separation() const;
};

SeparationPartition separation_partition(int d, double B, int box_radius);

// Sites of the box |n|_1 < N, |k| < N with min over signs of |D-tilde| < 1.
std::vector<MultiIndex> singular_sites(const ProblemParams& p, double omega, int N);
bool is_singular(const MultiIndex& xi, double omega, double alpha);
// Largest number of singular k over a fixed n.
int max_singular_per_n(const ProblemParams& p, double omega, int N);

struct SingularClusters {
  std::vector<MultiIndex> sites;
  std::vector<std::vector<int>> clusters;  // indices into sites, ordered by smallest member
  std::vector<int> diameter;               // l1 in (n,k)
  double cutoff = 0.0;                     // rho N^delta
  double diam_bound = 0.0;                 // N^{(Ctilde_d d + 2) delta}
  double min_distance = 0.0;               // achieved min distance between clusters
};

int l1_distance(const MultiIndex& a, const MultiIndex& b);

SingularClusters cluster_sites(const std::vector<MultiIndex>& sites, const SeparationPartition& part,
                               int N, double delta, double rho);

}  // namespace fnls
