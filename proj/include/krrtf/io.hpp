#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "krrtf/construct.hpp"
#include "krrtf/tasks.hpp"
#include "krrtf/transformer.hpp"

namespace krrtf {

using json = nlohmann::json;

// Shortest text that reads back to the same double.
std::string format_double(double x);

std::string hash_hex(std::uint64_t h);
std::uint64_t fnv1a(const std::string& text);

json matrix_to_json(const MatrixXd& m);
MatrixXd matrix_from_json(const json& j);

json transformer_to_json(const Transformer& tf);
Transformer transformer_from_json(const json& j);

json plan_to_json(const ConstructionParams& params, const ConstructionPlan& plan);

// One row per token: task, token, x_0..x_{d-1}, f, y (empty for the query token).
std::string task_batch_csv(const std::vector<GpTask>& tasks, const std::string& config_hash);
std::vector<GpTask> read_task_batch_csv(const std::string& text);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

class CsvWriter {
 public:
  CsvWriter(const std::string& config_hash, const std::vector<std::string>& header);
  CsvWriter& cell(const std::string& s);
  CsvWriter& cell(double x);
  CsvWriter& cell(int x);
  CsvWriter& cell(std::uint64_t x);
  void end_row();
  const std::string& str() const { return text_; }

 private:
  std::string text_;
  bool fresh_ = true;
};

}  // namespace krrtf
