#pragma once

#include <string>

#include "ckdprog/models/model.hpp"

namespace ckdprog {

// Versioned JSON with a family tag. Doubles are written with round-trip
// precision, so a load-save-load cycle reproduces predictions bit-exactly.
std::string serialize_model(const AnyModel& model);
AnyModel deserialize_model(const std::string& json_text);

void save_model(const AnyModel& model, const std::string& path);
AnyModel load_model(const std::string& path);

}  // namespace ckdprog
