#include "dgm/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "dgm/errors.hpp"
#include "json.hpp"

namespace dgm {

namespace {

using json = nlohmann::json;

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

json& object_at(json& parent, const std::string& key, const std::string& path) {
  if (!parent.contains(key)) parent[key] = json::object();
  json& j = parent[key];
  if (!j.is_object()) throw ConfigError(path, "must be an object");
  return j;
}

template <class T>
T get_or(json& obj, const std::string& key, const std::string& path, T fallback) {
  if (!obj.contains(key)) {
    obj[key] = fallback;
    return fallback;
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(path, "has the wrong type");
  }
}

std::size_t get_count(json& obj, const std::string& key, const std::string& path, std::size_t fallback) {
  if (!obj.contains(key)) {
    obj[key] = fallback;
    return fallback;
  }
  const json& v = obj.at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && v.get<long long>() < 0))
    throw ConfigError(path, "must be a non-negative integer");
  return v.get<std::size_t>();
}

double get_real(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "must be a number");
  return v.get<double>();
}

std::string shortest(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

/// A number or a DSL string.
std::string expression_text(const json& v, const std::string& path) {
  if (v.is_number()) return shortest(v.get<double>());
  if (v.is_string()) return v.get<std::string>();
  throw ConfigError(path, "must be a number or an expression string");
}

Expr parse_field(const std::string& text, const VarList& vars, const std::string& path) {
  try {
    return parse(text, vars);
  } catch (const Error& e) {
    throw ConfigError(path, e.what());
  }
}

bool mentions_identifier(std::string_view text, std::string_view name) {
  std::size_t i = 0;
  while (i < text.size()) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    if (std::isalpha(c) || c == '_') {
      std::size_t j = i + 1;
      while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) ++j;
      if (text.substr(i, j - i) == name) return true;
      i = j;
    } else if (std::isdigit(c) || c == '.') {
      // skip numbers (including exponents like 1e5) so "e5" is not an identifier
      std::size_t j = i + 1;
      while (j < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '.' ||
              ((text[j] == '+' || text[j] == '-') && (text[j - 1] == 'e' || text[j - 1] == 'E'))))
        ++j;
      i = j;
    } else {
      ++i;
    }
  }
  return false;
}

std::vector<double> vector_param(json& node, const std::string& key, const std::string& path,
                                 std::size_t dim, std::optional<double> fallback) {
  if (!node.contains(key)) {
    if (!fallback) throw ConfigError(path, "is required");
    node[key] = *fallback;
  }
  const json& v = node.at(key);
  std::vector<double> out;
  if (v.is_number()) {
    out.assign(dim, v.get<double>());
  } else if (v.is_array()) {
    for (const auto& x : v) out.push_back(get_real(x, path));
    if (out.size() != dim) throw ConfigError(path, "needs one entry per sampler dimension");
  } else {
    throw ConfigError(path, "must be a number or an array of numbers");
  }
  return out;
}

SamplerSpec parse_sampler(json& node, const std::string& path, std::size_t default_dim) {
  if (!node.is_object()) throw ConfigError(path, "must be an object");
  const std::string kind = get_or<std::string>(node, "kind", join(path, "kind"), "uniform");
  try {
    if (kind == "uniform") {
      return SamplerSpec::uniform(get_count(node, "dim", join(path, "dim"), default_dim));
    }
    if (kind == "truncated_gaussian") {
      const std::size_t dim = get_count(node, "dim", join(path, "dim"), default_dim);
      return SamplerSpec::truncated_gaussian(
          vector_param(node, "mean", join(path, "mean"), dim, 0.5),
          vector_param(node, "sd", join(path, "sd"), dim, std::nullopt));
    }
    if (kind == "exponential") {
      const std::size_t dim = get_count(node, "dim", join(path, "dim"), default_dim);
      return SamplerSpec::exponential(vector_param(node, "rate", join(path, "rate"), dim, std::nullopt));
    }
    if (kind == "mixture" || kind == "product") {
      if (!node.contains("children") || !node["children"].is_array() || node["children"].empty())
        throw ConfigError(join(path, "children"), "must be a non-empty array");
      std::vector<SamplerSpec> children;
      json& list = node["children"];
      for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string child_path = join(path, "children[" + std::to_string(i) + "]");
        // product children default to one coordinate each
        children.push_back(parse_sampler(list[i], child_path, kind == "product" ? 1 : default_dim));
      }
      if (kind == "product") return SamplerSpec::product(std::move(children));
      std::vector<double> weights;
      if (!node.contains("weights")) {
        node["weights"] = std::vector<double>(children.size(), 1.0 / static_cast<double>(children.size()));
      }
      for (const auto& w : node["weights"]) weights.push_back(get_real(w, join(path, "weights")));
      return SamplerSpec::mixture(std::move(children), std::move(weights));
    }
    if (kind == "affine") {
      if (!node.contains("child")) throw ConfigError(join(path, "child"), "is required");
      SamplerSpec child = parse_sampler(node["child"], join(path, "child"), default_dim);
      const std::size_t dim = child.dim();
      return SamplerSpec::affine(child, vector_param(node, "scale", join(path, "scale"), dim, 1.0),
                                 vector_param(node, "shift", join(path, "shift"), dim, 0.0));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(path, e.what());
  }
  throw ConfigError(join(path, "kind"), "unknown sampler kind '" + kind + "'");
}

SamplerSpec parse_top_sampler(json& node, const std::string& path, std::size_t dims) {
  SamplerSpec s = parse_sampler(node, path, dims);
  if (s.dim() != dims)
    throw ConfigError(path, "sampler dimension " + std::to_string(s.dim()) +
                                " does not match the problem dimension " + std::to_string(dims));
  return s;
}

PdeProblem parse_pde(json& pde) {
  PdeProblem p;
  if (!pde.contains("form")) throw ConfigError("pde.form", "is required");
  const std::string form_text = expression_text(pde["form"], "pde.form");

  // variables
  std::vector<std::string> names;
  if (pde.contains("variables")) {
    if (!pde["variables"].is_array()) throw ConfigError("pde.variables", "must be an array of names");
    for (const auto& v : pde["variables"]) {
      if (!v.is_string()) throw ConfigError("pde.variables", "must be an array of names");
      names.push_back(v.get<std::string>());
    }
  }
  std::size_t n_dims = 0;
  if (pde.contains("n_dims")) {
    n_dims = get_count(pde, "n_dims", "pde.n_dims", 0);
  } else if (!names.empty()) {
    n_dims = names.size();
  } else if (pde.contains("domain") && pde["domain"].is_array()) {
    n_dims = pde["domain"].size();
  } else {
    throw ConfigError("pde.n_dims", "is required");
  }
  if (n_dims < 1) throw ConfigError("pde.n_dims", "must be at least 1");
  pde["n_dims"] = n_dims;

  try {
    if (names.empty()) {
      const bool with_time = mentions_identifier(form_text, "t");
      if (with_time && n_dims < 2) throw ConfigError("pde.n_dims", "an evolution problem needs at least 2 dims");
      p.vars = VarList::standard(with_time ? n_dims - 1 : n_dims, with_time);
      pde["variables"] = p.vars.names();
    } else {
      if (names.size() != n_dims)
        throw ConfigError("pde.variables", "needs exactly n_dims names");
      p.vars = VarList(names);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("pde.variables", e.what());
  }

  // domain
  if (!pde.contains("domain")) {
    json d = json::array();
    for (std::size_t i = 0; i < n_dims; ++i) d.push_back({0.0, 1.0});
    pde["domain"] = d;
  }
  const json& d = pde["domain"];
  if (!d.is_array() || d.size() != n_dims)
    throw ConfigError("pde.domain", "needs one [lo, hi] pair per dimension");
  std::vector<Interval> axes;
  for (const auto& pair : d) {
    if (!pair.is_array() || pair.size() != 2) throw ConfigError("pde.domain", "needs [lo, hi] pairs");
    axes.push_back({get_real(pair[0], "pde.domain"), get_real(pair[1], "pde.domain")});
  }
  if (p.vars.has_time()) {
    p.domain.time = axes.back();
    axes.pop_back();
  }
  p.domain.spatial = std::move(axes);
  try {
    p.domain.validate();
  } catch (const Error& e) {
    throw ConfigError("pde.domain", e.what());
  }

  p.form = parse_field(form_text, p.vars, "pde.form");
  if (!pde.contains("boundary_condition")) pde["boundary_condition"] = 0.0;
  p.boundary = parse_field(expression_text(pde["boundary_condition"], "pde.boundary_condition"), p.vars,
                           "pde.boundary_condition");
  if (pde.contains("initial_condition") && !pde["initial_condition"].is_null())
    p.initial = parse_field(expression_text(pde["initial_condition"], "pde.initial_condition"), p.vars,
                            "pde.initial_condition");
  if (pde.contains("initial_rate") && !pde["initial_rate"].is_null())
    p.initial_rate = parse_field(expression_text(pde["initial_rate"], "pde.initial_rate"), p.vars,
                                 "pde.initial_rate");
  p.validate();
  return p;
}

NetworkSpec parse_body(json& body, std::size_t input_dim) {
  NetworkSpec spec;
  spec.input_dim = input_dim;
  spec.layout = get_or<std::string>(body, "layout", "body.layout", "fa fa fa f");
  if (!body.contains("units")) throw ConfigError("body.units", "is required");
  if (!body["units"].is_array()) throw ConfigError("body.units", "must be an array of widths");
  for (const auto& u : body["units"]) {
    if (!u.is_number_integer() || u.get<long long>() < 1)
      throw ConfigError("body.units", "widths must be positive integers");
    spec.units.push_back(u.get<std::size_t>());
  }

  std::size_t n_act = 0;
  for (char c : spec.layout) n_act += c == 'a';
  if (body.contains("activation") && !body.contains("activations")) {
    body["activations"] = body["activation"];
    body.erase("activation");
  }
  if (!body.contains("activations")) body["activations"] = "tanh";
  json& acts = body["activations"];
  if (acts.is_string()) acts = json(std::vector<std::string>(n_act, acts.get<std::string>()));
  if (!acts.is_array()) throw ConfigError("body.activations", "must be a name or an array of names");
  try {
    for (const auto& a : acts) {
      if (!a.is_string()) throw ConfigError("body.activations", "must be a name or an array of names");
      spec.activations.push_back(activation_from_name(a.get<std::string>()));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("body.activations", e.what());
  }
  try {
    parse_layout(spec);
  } catch (const LayoutError& e) {
    throw ConfigError("body.layout", e.what());
  }
  return spec;
}

TrainConfig parse_train(json& train) {
  TrainConfig cfg;
  const std::string mode = get_or<std::string>(train, "mode", "train.mode", "ansatz");
  if (mode == "ansatz")
    cfg.mode = TrainMode::Ansatz;
  else if (mode == "soft")
    cfg.mode = TrainMode::Soft;
  else
    throw ConfigError("train.mode", "must be 'ansatz' or 'soft'");
  cfg.batch_size = get_count(train, "batch_size", "train.batch_size", cfg.batch_size);
  cfg.boundary_batch_size = get_count(train, "boundary_batch_size", "train.boundary_batch_size", cfg.boundary_batch_size);
  cfg.initial_batch_size = get_count(train, "initial_batch_size", "train.initial_batch_size", cfg.initial_batch_size);
  cfg.n_iters = get_count(train, "n_iters", "train.n_iters", cfg.n_iters);
  const std::string opt = get_or<std::string>(train, "optimizer", "train.optimizer", "adam");
  if (opt == "adam" || opt == "Adam")
    cfg.optimizer = OptimizerKind::Adam;
  else if (opt == "sgd" || opt == "SGD")
    cfg.optimizer = OptimizerKind::Sgd;
  else
    throw ConfigError("train.optimizer", "must be 'adam' or 'sgd'");
  cfg.learning_rate = get_or<double>(train, "learning_rate", "train.learning_rate", cfg.learning_rate);
  cfg.beta1 = get_or<double>(train, "beta1", "train.beta1", cfg.beta1);
  cfg.beta2 = get_or<double>(train, "beta2", "train.beta2", cfg.beta2);
  cfg.epsilon = get_or<double>(train, "epsilon", "train.epsilon", cfg.epsilon);
  if (train.contains("seed") && !train["seed"].is_number_unsigned())
    throw ConfigError("train.seed", "must be a non-negative integer");
  cfg.seed = get_or<std::uint64_t>(train, "seed", "train.seed", cfg.seed);
  json& w = object_at(train, "weights", "train.weights");
  cfg.residual_weight = get_or<double>(w, "residual", "train.weights.residual", 1.0);
  cfg.boundary_weight = get_or<double>(w, "boundary", "train.weights.boundary", 1.0);
  cfg.initial_weight = get_or<double>(w, "initial", "train.weights.initial", 1.0);
  cfg.validate();
  return cfg;
}

void apply(json& root, const RunOverrides& o) {
  auto& train = object_at(root, "train", "train");
  auto& output = object_at(root, "output", "output");
  if (o.out_dir) output["out_dir"] = *o.out_dir;
  if (o.seed) train["seed"] = *o.seed;
  if (o.iters) {
    train["n_iters"] = *o.iters;
    if (train.contains("stages") && train["stages"].is_array())
      for (auto& s : train["stages"])
        if (s.is_object()) s["n_iters"] = *o.iters;
  }
  if (o.batch_size) train["batch_size"] = *o.batch_size;
  if (o.grid) output["grid"] = *o.grid;
  if (o.time) output["time"] = *o.time;
  if (o.mode) train["mode"] = *o.mode;
}

}  // namespace

std::size_t RunConfig::total_iters() const {
  std::size_t n = 0;
  for (const auto& s : stages) n += s.n_iters;
  return n;
}

RunConfig parse_run_config(std::string_view json_text, const RunOverrides& overrides) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config", "top level must be an object");
  apply(root, overrides);

  RunConfig rc;
  json& pde = object_at(root, "pde", "pde");
  rc.problem = parse_pde(pde);
  const std::size_t dims = rc.problem.vars.size();
  rc.body = parse_body(object_at(root, "body", "body"), dims);
  json& train = object_at(root, "train", "train");
  rc.train = parse_train(train);

  if (train.contains("stages")) {
    json& stages = train["stages"];
    if (!stages.is_array() || stages.empty()) throw ConfigError("train.stages", "must be a non-empty array");
    for (std::size_t i = 0; i < stages.size(); ++i) {
      const std::string path = "train.stages[" + std::to_string(i) + "]";
      json& st = stages[i];
      if (!st.is_object()) throw ConfigError(path, "must be an object");
      if (!st.contains("sampler")) st["sampler"] = json::object();
      FitStage stage{parse_top_sampler(st["sampler"], path + ".sampler", dims),
                     get_count(st, "n_iters", path + ".n_iters", rc.train.n_iters)};
      if (stage.n_iters < 1) throw ConfigError(path + ".n_iters", "must be at least 1");
      rc.stages.push_back(std::move(stage));
    }
  } else {
    if (!root.contains("sampler")) root["sampler"] = json::object();
    rc.stages.push_back({parse_top_sampler(root["sampler"], "sampler", dims), rc.train.n_iters});
  }

  json& output = object_at(root, "output", "output");
  rc.output.out_dir = get_or<std::string>(output, "out_dir", "output.out_dir", rc.output.out_dir);
  rc.output.grid = get_count(output, "grid", "output.grid", rc.output.grid);
  if (rc.output.grid < 2) throw ConfigError("output.grid", "must be at least 2");
  if (output.contains("time") && !output["time"].is_null()) {
    rc.output.time = get_real(output["time"], "output.time");
    if (!rc.problem.domain.time) throw ConfigError("output.time", "the problem has no time axis");
  }

  rc.resolved_json = root.dump(2);
  return rc;
}

RunConfig load_run_config(const std::filesystem::path& path, const RunOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), overrides);
}

}  // namespace dgm
