#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "dmc/carleman/carleman.hpp"
#include "dmc/core/history.hpp"
#include "dmc/core/memory_kernel.hpp"
#include "dmc/core/time_grid.hpp"
#include "dmc/forward/delay_system.hpp"
#include "dmc/heat/heat.hpp"
#include "dmc/synthesis/synthesis.hpp"

namespace dmc::io {

using Json = nlohmann::json;

Json read_json_file(const std::string& path);

Mat matrix_from_json(const Json& j, const std::string& what);
Vec vector_from_json(const Json& j, const std::string& what);
Json to_json(const Mat& m);
Json to_json(const Vec& v);

MemoryKernel kernel_from_json(const Json& j, int dim);
Json kernel_to_json(const MemoryKernel& k);

HistoryFunction history_from_json(const Json& j, int dim, const TimeGrid& grid);

/// A problem document: system matrices, kernels, horizon, grid and history.
struct Problem {
  DelaySystem system;
  TimeGrid grid;
  Json source;
};

Problem problem_from_json(const Json& j);
NodeSignal control_from_json(const Json& j, int m, const TimeGrid& grid);

SynthesisConfig synthesis_config_from_json(const Json& j);
HeatConfig heat_config_from_json(const Json& j);
WeightSpec weight_spec_from_json(const Json& j);

/// Reads a long-format "t,x,value" CSV (the heat field layout). Rows with
/// t < 0 become the history block.
SpaceTimeField read_field_csv(const std::string& path, double h);

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a_hex(const std::string& data);

}  // namespace dmc::io
