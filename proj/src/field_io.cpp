#include "fnls/field_io.hpp"

#include <fstream>

namespace fnls {

nlohmann::json field_to_json(const FourierField& f) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& [xi, a] : f.entries()) {
    nlohmann::json row = nlohmann::json::array();
    for (int ax = 0; ax <= f.dim(); ++ax) row.push_back(xi.axis(ax));
    row.push_back(a.real());
    row.push_back(a.imag());
    entries.push_back(std::move(row));
  }
  nlohmann::json j = {{"dim", f.dim()}, {"radius", f.radius()}, {"entries", std::move(entries)}};
  if (f.real_valued()) j["real_valued"] = true;
  return j;
}

FourierField field_from_json(const nlohmann::json& j) {
  for (const auto& [key, _] : j.items())
    if (key != "dim" && key != "radius" && key != "entries" && key != "real_valued")
      throw std::invalid_argument("field: unknown key '" + key + "'");
  const int d = j.at("dim").get<int>();
  const int radius = j.at("radius").get<int>();
  std::vector<FourierField::Entry> entries;
  for (const auto& row : j.at("entries")) {
    if (!row.is_array() || row.size() != static_cast<size_t>(d + 3))
      throw std::invalid_argument("field: entry must hold d+1 indices and re, im");
    MultiIndex xi(d);
    for (int ax = 0; ax <= d; ++ax) xi.set_axis(ax, row[ax].get<int>());
    entries.emplace_back(xi, cplx(row[d + 1].get<double>(), row[d + 2].get<double>()));
  }
  return FourierField::from_entries(d, radius, std::move(entries), j.value("real_valued", false));
}

void write_field(const FourierField& f, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << field_to_json(f).dump(1) << "\n";
}

FourierField read_field(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path);
  return field_from_json(nlohmann::json::parse(is));
}

}  // namespace fnls
