#include "krrtf/config.hpp"

#include <set>

namespace krrtf {

namespace {

template <typename T>
void read_optional(const json& j, const char* key, std::optional<T>& field) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null()) {
    field.reset();
  } else {
    field = j.at(key).get<T>();
  }
}

template <typename T>
void read(const json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

template <typename T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

const std::set<std::string> kKnownKeys = {
    "distribution", "d", "n", "bandwidth", "sigma_noise", "clip_radius", "lambda0", "lambda",
    "eta", "c", "eps", "iterations", "b_x", "b_y", "max_iterations", "steps", "cg_tol", "batch",
    "seed", "out", "transformer", "context_lengths", "sigma_train", "sigma_test", "l_finite",
    "sweep_distributions"};

}  // namespace

DistributionSpec ExperimentConfig::distribution_spec() const {
  DistributionSpec s;
  s.kind = parse_distribution(distribution);
  s.d = d;
  s.clip_radius = clip_radius;
  return s;
}

Regularization ExperimentConfig::regularization() const {
  if (lambda0) return Regularization::per_sample(*lambda0);
  if (lambda) return Regularization::total(*lambda);
  return Regularization::total(sigma_noise * sigma_noise);
}

double ExperimentConfig::input_bound() const {
  if (b_x) return *b_x;
  return distribution_spec().input_bound();
}

std::vector<int> ExperimentConfig::resolved_context_lengths() const {
  if (!context_lengths.empty()) return context_lengths;
  std::vector<int> all;
  for (int k = 2; k <= n; ++k) all.push_back(k);
  if (all.empty()) all.push_back(n);
  return all;
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  try {
    parse_distribution(distribution);
    for (const std::string& s : sweep_distributions) parse_distribution(s);
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  if (d < 1) fail("d must be at least 1");
  if (n < 1) fail("n must be at least 1");
  if (!(bandwidth > 0.0)) fail("bandwidth must be positive");
  if (!(sigma_noise >= 0.0)) fail("sigma_noise must be non-negative");
  if (clip_radius && !(*clip_radius > 0.0)) fail("clip_radius must be positive");
  if (lambda0 && lambda) fail("set lambda0 or lambda, not both");
  if (lambda0 && !(*lambda0 > 0.0)) fail("lambda0 must be positive");
  if (lambda && !(*lambda > 0.0)) fail("lambda must be positive");
  if (!lambda0 && !lambda && !(sigma_noise > 0.0)) fail("lambda defaults to sigma_noise^2, which is zero");
  if (eta && !(*eta > 0.0)) fail("eta must be positive");
  if (!(c > 0.0 && c < 1.0)) fail("c must lie in (0, 1)");
  if (!(eps > 0.0 && eps < c)) fail("eps must lie in (0, c)");
  if (iterations && *iterations < 0) fail("iterations must be non-negative");
  if (b_x && !(*b_x >= 0.0)) fail("b_x must be non-negative");
  if (b_y && !(*b_y > 0.0)) fail("b_y must be positive");
  if (steps.richardson < 0 || steps.cg < 1 || steps.gd < 0 || steps.nesterov < 0) fail("bad step budget");
  if (batch < 1) fail("batch must be at least 1");
  for (int k : context_lengths) {
    if (k < 1 || k > n) fail("context length outside 1..n");
  }
  if (!(sigma_train >= 0.0)) fail("sigma_train must be non-negative");
  if (l_finite < 1) fail("l_finite must be at least 1");
}

json ExperimentConfig::to_json() const {
  return json{{"distribution", distribution},
              {"d", d},
              {"n", n},
              {"bandwidth", bandwidth},
              {"sigma_noise", sigma_noise},
              {"clip_radius", optional_json(clip_radius)},
              {"lambda0", optional_json(lambda0)},
              {"lambda", optional_json(lambda)},
              {"eta", optional_json(eta)},
              {"c", c},
              {"eps", eps},
              {"iterations", optional_json(iterations)},
              {"b_x", optional_json(b_x)},
              {"b_y", optional_json(b_y)},
              {"max_iterations", max_iterations},
              {"steps",
               {{"richardson", steps.richardson},
                {"cg", steps.cg},
                {"gd", steps.gd},
                {"nesterov", steps.nesterov}}},
              {"cg_tol", cg_tol},
              {"batch", batch},
              {"seed", seed},
              {"out", out},
              {"transformer", transformer},
              {"context_lengths", context_lengths},
              {"sigma_train", sigma_train},
              {"sigma_test", sigma_test},
              {"l_finite", l_finite},
              {"sweep_distributions", sweep_distributions}};
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& item : j.items()) {
    if (!kKnownKeys.count(item.key())) throw ConfigError("unknown config key: " + item.key());
  }
  ExperimentConfig c;
  try {
    read(j, "distribution", c.distribution);
    read(j, "d", c.d);
    read(j, "n", c.n);
    read(j, "bandwidth", c.bandwidth);
    read(j, "sigma_noise", c.sigma_noise);
    read_optional(j, "clip_radius", c.clip_radius);
    read_optional(j, "lambda0", c.lambda0);
    read_optional(j, "lambda", c.lambda);
    read_optional(j, "eta", c.eta);
    read(j, "c", c.c);
    read(j, "eps", c.eps);
    read_optional(j, "iterations", c.iterations);
    read_optional(j, "b_x", c.b_x);
    read_optional(j, "b_y", c.b_y);
    read(j, "max_iterations", c.max_iterations);
    if (j.contains("steps")) {
      const json& s = j.at("steps");
      read(s, "richardson", c.steps.richardson);
      read(s, "cg", c.steps.cg);
      read(s, "gd", c.steps.gd);
      read(s, "nesterov", c.steps.nesterov);
    }
    read(j, "cg_tol", c.cg_tol);
    read(j, "batch", c.batch);
    read(j, "seed", c.seed);
    read(j, "out", c.out);
    read(j, "transformer", c.transformer);
    read(j, "context_lengths", c.context_lengths);
    read(j, "sigma_train", c.sigma_train);
    read(j, "sigma_test", c.sigma_test);
    read(j, "l_finite", c.l_finite);
    read(j, "sweep_distributions", c.sweep_distributions);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  return c;
}

std::string ExperimentConfig::hash() const {
  json j = to_json();
  j.erase("out");
  return hash_hex(fnv1a(j.dump()));
}

ExperimentConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = read_text(path);
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse failure: ") + e.what());
  }
  return ExperimentConfig::from_json(j);
}

}  // namespace krrtf
