#pragma once

#include <string>

#include <json.hpp>

#include "fnls/fourier_field.hpp"

namespace fnls {

// {dim, radius, real_valued?, entries: [[n..., k, re, im], ...]} sorted by index.
nlohmann::json field_to_json(const FourierField& f);
FourierField field_from_json(const nlohmann::json& j);

void write_field(const FourierField& f, const std::string& path);
FourierField read_field(const std::string& path);

}  // namespace fnls
