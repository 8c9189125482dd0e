#include "krrtf/io.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace krrtf {

std::string format_double(double x) {
  char buf[40];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

json matrix_to_json(const MatrixXd& m) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

MatrixXd matrix_from_json(const json& j) {
  const Eigen::Index rows = j.at("rows").get<Eigen::Index>();
  const Eigen::Index cols = j.at("cols").get<Eigen::Index>();
  const json& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw std::invalid_argument("matrix data length does not match its shape");
  }
  MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = data[static_cast<std::size_t>(i * cols + k)].get<double>();
  }
  return m;
}

json transformer_to_json(const Transformer& tf) {
  json blocks = json::array();
  for (const Block& b : tf.blocks) {
    json jb;
    jb["label"] = b.label;
    jb["capture"] = b.capture;
    if (b.attention) {
      const AttentionWeights& a = *b.attention;
      std::vector<std::vector<bool>> mask(static_cast<std::size_t>(a.excluded.rows()));
      for (Eigen::Index i = 0; i < a.excluded.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.excluded.cols(); ++j) mask[i].push_back(a.excluded(i, j));
      }
      jb["attention"] = {{"query", matrix_to_json(a.query)},
                         {"key", matrix_to_json(a.key)},
                         {"value", matrix_to_json(a.value)},
                         {"mask", mask}};
    } else {
      jb["attention"] = nullptr;
    }
    if (b.mlp) {
      jb["mlp"] = {{"w_in", matrix_to_json(MatrixXd(b.mlp->w_in()))},
                   {"w_out", matrix_to_json(MatrixXd(b.mlp->w_out()))}};
    } else {
      jb["mlp"] = nullptr;
    }
    blocks.push_back(std::move(jb));
  }
  return json{{"format", "krrtf-weights-1"}, {"blocks", blocks}};
}

Transformer transformer_from_json(const json& j) {
  Transformer tf;
  for (const json& jb : j.at("blocks")) {
    Block b;
    b.label = jb.value("label", "");
    b.capture = jb.value("capture", false);
    if (!jb.at("attention").is_null()) {
      const json& ja = jb.at("attention");
      auto a = std::make_shared<AttentionWeights>();
      a->query = matrix_from_json(ja.at("query"));
      a->key = matrix_from_json(ja.at("key"));
      a->value = matrix_from_json(ja.at("value"));
      const json& mask = ja.at("mask");
      const Eigen::Index n = static_cast<Eigen::Index>(mask.size());
      a->excluded = MaskMatrix::Constant(n, n, false);
      for (Eigen::Index i = 0; i < n; ++i) {
        if (static_cast<Eigen::Index>(mask[i].size()) != n) throw std::invalid_argument("mask must be square");
        for (Eigen::Index k = 0; k < n; ++k) a->excluded(i, k) = mask[i][k].get<bool>();
      }
      b.attention = a;
    }
    if (!jb.at("mlp").is_null()) {
      b.mlp = std::make_shared<const MlpWeights>(matrix_from_json(jb.at("mlp").at("w_in")),
                                                 matrix_from_json(jb.at("mlp").at("w_out")));
    }
    tf.blocks.push_back(std::move(b));
  }
  return tf;
}

json plan_to_json(const ConstructionParams& p, const ConstructionPlan& plan) {
  json params = {{"lambda0", p.lambda0}, {"eta", p.eta}, {"v", p.v},   {"c", p.c}, {"eps", p.eps},
                 {"b_x", p.bx},          {"b_y", p.by},  {"n", p.n},   {"d", p.d}};
  json widths = {{"n_flip", plan.n_flip}, {"n_sq", plan.n_sq},     {"n_sq_tilde", plan.n_sq_tilde},
                 {"n_inv", plan.n_inv},   {"n_sq_hat", plan.n_sq_hat}, {"max_width", plan.width}};
  json consts = {{"kappa_min", plan.kappa_min}, {"rate", plan.rate},   {"b_alpha", plan.b_alpha},
                 {"b_w", plan.b_w},             {"b_w_tilde", plan.b_w_tilde}, {"c_sys", plan.c_sys},
                 {"bound", plan.c_sys * plan.eps}};
  json budgets = {{"eps_flip", plan.eps}, {"eps_sq", plan.eps}, {"eps_sq_tilde", plan.eps},
                  {"eps_sq_hat", plan.eps}, {"eps_inv", plan.eps}};
  return json{{"params", params},
              {"L", plan.L},
              {"blocks", plan.block_count},
              {"widths", widths},
              {"constants", consts},
              {"error_budgets", budgets}};
}

std::string task_batch_csv(const std::vector<GpTask>& tasks, const std::string& config_hash) {
  const int d = tasks.empty() ? 0 : static_cast<int>(tasks[0].X.cols());
  std::vector<std::string> header = {"task", "token"};
  for (int k = 0; k < d; ++k) header.push_back("x" + std::to_string(k));
  header.push_back("f");
  header.push_back("y");
  CsvWriter w(config_hash, header);
  for (std::size_t b = 0; b < tasks.size(); ++b) {
    const GpTask& t = tasks[b];
    for (Eigen::Index i = 0; i < t.X.rows(); ++i) {
      w.cell(static_cast<int>(b)).cell(static_cast<int>(i + 1));
      for (int k = 0; k < d; ++k) w.cell(t.X(i, k));
      w.cell(t.f_values[i]);
      if (i < t.y_noisy.size()) {
        w.cell(t.y_noisy[i]);
      } else {
        w.cell(std::string());
      }
      w.end_row();
    }
  }
  return w.str();
}

std::vector<GpTask> read_task_batch_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::map<int, std::vector<std::vector<std::string>>> rows;
  bool header_seen = false;
  int d = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (!header_seen) {
      header_seen = true;
      d = static_cast<int>(cells.size()) - 4;
      if (d < 1) throw std::invalid_argument("task CSV header has no input columns");
      continue;
    }
    if (static_cast<int>(cells.size()) != d + 4) throw std::invalid_argument("task CSV row has wrong width");
    rows[std::stoi(cells[0])].push_back(cells);
  }
  std::vector<GpTask> tasks;
  for (const auto& [id, token_rows] : rows) {
    const int count = static_cast<int>(token_rows.size());
    if (count < 2) throw std::invalid_argument("task needs a context point and a query");
    GpTask t;
    t.X.resize(count, d);
    t.f_values.resize(count);
    t.y_noisy.resize(count - 1);
    for (int i = 0; i < count; ++i) {
      const auto& c = token_rows[i];
      if (std::stoi(c[1]) != i + 1) throw std::invalid_argument("task CSV tokens out of order");
      for (int k = 0; k < d; ++k) t.X(i, k) = std::strtod(c[2 + k].c_str(), nullptr);
      t.f_values[i] = std::strtod(c[2 + d].c_str(), nullptr);
      if (i + 1 < count) t.y_noisy[i] = std::strtod(c[3 + d].c_str(), nullptr);
    }
    tasks.push_back(std::move(t));
  }
  return tasks;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CsvWriter::CsvWriter(const std::string& config_hash, const std::vector<std::string>& header) {
  text_ = "# config_hash=" + config_hash + "\n";
  for (const std::string& h : header) cell(h);
  end_row();
}

CsvWriter& CsvWriter::cell(const std::string& s) {
  if (!fresh_) text_ += ',';
  text_ += s;
  fresh_ = false;
  return *this;
}

CsvWriter& CsvWriter::cell(double x) { return cell(format_double(x)); }
CsvWriter& CsvWriter::cell(int x) { return cell(std::to_string(x)); }
CsvWriter& CsvWriter::cell(std::uint64_t x) { return cell(std::to_string(x)); }

void CsvWriter::end_row() {
  text_ += '\n';
  fresh_ = true;
}

}  // namespace krrtf
