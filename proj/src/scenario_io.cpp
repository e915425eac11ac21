#include "byzopt/scenario_io.hpp"

#include <fstream>
#include <random>
#include <set>

#include "byzopt/errors.hpp"

namespace byzopt {

using nlohmann::json;

namespace {

[[noreturn]] void parse_fail(const std::string& what) { throw ConfigError(ConfigError::Kind::Parse, what); }

void only_keys(const json& j, std::initializer_list<const char*> allowed, const char* where) {
  if (!j.is_object()) parse_fail(std::string(where) + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) parse_fail(std::string(where) + ": unknown key '" + it.key() + "'");
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  return it == j.end() ? fallback : it->get<T>();
}

// Uniform in [lo, hi) from the top 53 bits; independent of the standard
// library's distribution implementations.
double uniform(std::mt19937_64& rng, double lo, double hi) {
  double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

std::string policy_name(SilentPolicy p) { return p == SilentPolicy::Isolate ? "isolate" : "default_value"; }
std::string trim_name(Alg3Trim t) { return t == Alg3Trim::Sign ? "sign" : "rank"; }

}  // namespace

json to_json(const AdmissibleFunction& f) {
  json j;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Quadratic>) {
          j = {{"kind", "quadratic"}, {"a", s.vertex}, {"s", s.scale}, {"c", s.offset}};
        } else if constexpr (std::is_same_v<T, Huber>) {
          j = {{"kind", "huber"}, {"a", s.vertex}, {"L", s.slope}, {"delta", s.width}};
        } else {
          json bps = json::array();
          for (const auto& b : s.breakpoints) bps.push_back({b.x, b.derivative});
          j = {{"kind", "pwl"}, {"breakpoints", bps}};
        }
      },
      f.shape());
  if (f.lipschitz_declared()) j["lipschitz_bound"] = *f.lipschitz_bound();
  return j;
}

AdmissibleFunction function_from_json(const json& j) {
  if (!j.is_object() || !j.contains("kind")) parse_fail("function: expected an object with 'kind'");
  std::string kind = j.at("kind").get<std::string>();
  std::optional<AdmissibleFunction> f;
  try {
    if (kind == "quadratic") {
      only_keys(j, {"kind", "a", "s", "c", "lipschitz_bound"}, "quadratic");
      f = AdmissibleFunction::quadratic(j.at("a").get<double>(), get_or(j, "s", 1.0), get_or(j, "c", 0.0));
    } else if (kind == "huber") {
      only_keys(j, {"kind", "a", "L", "delta", "lipschitz_bound"}, "huber");
      f = AdmissibleFunction::huber(j.at("a").get<double>(), j.at("L").get<double>(), j.at("delta").get<double>());
    } else if (kind == "pwl") {
      only_keys(j, {"kind", "breakpoints", "lipschitz_bound"}, "pwl");
      std::vector<Breakpoint> bps;
      for (const auto& b : j.at("breakpoints")) {
        if (!b.is_array() || b.size() != 2) parse_fail("pwl: breakpoints are [x, derivative] pairs");
        bps.push_back({b[0].get<double>(), b[1].get<double>()});
      }
      f = AdmissibleFunction::piecewise(std::move(bps));
    } else {
      parse_fail("function: unknown kind '" + kind + "'");
    }
  } catch (const ArgumentError& e) {
    parse_fail(std::string("function: ") + e.what());
  }
  if (j.contains("lipschitz_bound")) return f->with_lipschitz_bound(j.at("lipschitz_bound").get<double>());
  return *f;
}

json to_json(const AdversarySpec& a) {
  json j{{"kind", to_string(a.kind)}};
  switch (a.kind) {
    case AdversaryKind::ConstantGradient: j["gradient"] = a.gradient; break;
    case AdversaryKind::ExtremeGradient:
      j["sign"] = a.sign;
      j["magnitude"] = a.magnitude;
      break;
    case AdversaryKind::VirtualFunction: j["function"] = to_json(*a.function); break;
    case AdversaryKind::FlipFlop:
      j["period"] = a.period;
      j["magnitude"] = a.magnitude;
      break;
    case AdversaryKind::MedianDrag: j["target"] = a.target; break;
    case AdversaryKind::Equivocate:
      j["low"] = a.low;
      j["high"] = a.high;
      break;
    case AdversaryKind::Random: j["magnitude"] = a.magnitude; break;
    default: break;
  }
  return j;
}

AdversarySpec adversary_from_json(const json& j) {
  if (j.is_string()) {
    AdversarySpec a;
    a.kind = adversary_kind_from_string(j.get<std::string>());
    return a;
  }
  only_keys(j, {"kind", "gradient", "sign", "magnitude", "period", "target", "low", "high", "function"}, "adversary");
  AdversarySpec a;
  a.kind = adversary_kind_from_string(j.at("kind").get<std::string>());
  a.gradient = get_or(j, "gradient", a.gradient);
  a.sign = get_or(j, "sign", a.sign);
  a.magnitude = get_or(j, "magnitude", a.magnitude);
  a.period = get_or(j, "period", a.period);
  a.target = get_or(j, "target", a.target);
  a.low = get_or(j, "low", a.low);
  a.high = get_or(j, "high", a.high);
  if (j.contains("function")) a.function = function_from_json(j.at("function"));
  return a;
}

json to_json(const Scenario& s) {
  json fs = json::array();
  for (const auto& f : s.functions) fs.push_back(to_json(f));
  json overrides = json::object();
  for (const auto& [id, spec] : s.adversary_overrides) overrides[std::to_string(id)] = to_json(spec);
  json j{
      {"name", s.name},
      {"n", s.n},
      {"f", s.f},
      {"faulty", std::vector<AgentId>(s.faulty.begin(), s.faulty.end())},
      {"functions", fs},
      {"adversary", to_json(s.adversary)},
      {"adversary_overrides", overrides},
      {"algorithm", to_string(s.algorithm)},
      {"stepsize", {{"scale", s.stepsize.scale}, {"power", s.stepsize.power}}},
      {"max_rounds", s.max_rounds},
      {"tol", s.tol},
      {"seed", s.seed},
      {"default_function", to_json(s.default_function)},
      {"default_value", s.default_value},
      {"silent_policy", policy_name(s.silent_policy)},
      {"alg3_trim", trim_name(s.alg3_trim)},
      {"trace_stride", s.trace_stride},
      {"certificate_tolerance", s.certificate_tolerance},
      {"keep_round_log", s.keep_round_log},
  };
  if (s.lipschitz) j["lipschitz"] = *s.lipschitz;
  return j;
}

std::vector<AdmissibleFunction> generate_functions(const json& g, int n, std::uint64_t seed) {
  only_keys(g,
            {"kind", "seed", "vertex_min", "vertex_max", "scale_min", "scale_max", "slope_min", "slope_max",
             "width_min", "width_max"},
            "generator");
  std::string kind = get_or<std::string>(g, "kind", "quadratic");
  if (kind != "quadratic" && kind != "huber" && kind != "mixed") parse_fail("generator: unknown kind '" + kind + "'");
  std::mt19937_64 rng(get_or<std::uint64_t>(g, "seed", seed));
  double vmin = get_or(g, "vertex_min", -10.0), vmax = get_or(g, "vertex_max", 10.0);
  double smin = get_or(g, "scale_min", 0.5), smax = get_or(g, "scale_max", 2.0);
  double lmin = get_or(g, "slope_min", 2.0), lmax = get_or(g, "slope_max", 2.0);
  double wmin = get_or(g, "width_min", 0.5), wmax = get_or(g, "width_max", 2.0);
  std::vector<AdmissibleFunction> out;
  for (int i = 0; i < n; ++i) {
    bool huber = kind == "huber" || (kind == "mixed" && (rng() & 1u));
    double a = uniform(rng, vmin, vmax);
    if (huber) {
      double slope = uniform(rng, lmin, lmax);
      out.push_back(AdmissibleFunction::huber(a, slope, uniform(rng, wmin, wmax)));
    } else {
      out.push_back(AdmissibleFunction::quadratic(a, uniform(rng, smin, smax), 0.0));
    }
  }
  return out;
}

Scenario scenario_from_json(const json& j) {
  Scenario s;
  try {
    only_keys(j,
              {"name", "n", "f", "faulty", "functions", "generator", "adversary", "adversary_overrides", "algorithm",
               "stepsize", "max_rounds", "tol", "seed", "default_function", "default_value", "silent_policy",
               "alg3_trim", "lipschitz", "trace_stride", "certificate_tolerance", "keep_round_log"},
              "scenario");
    s.name = get_or<std::string>(j, "name", s.name);
    s.n = j.at("n").get<int>();
    if (j.at("f").is_string()) {
      if (j.at("f").get<std::string>() != "auto") parse_fail("f must be an integer or \"auto\"");
      s.f = (s.n - 1) / 3;
    } else {
      s.f = j.at("f").get<int>();
    }
    for (const auto& id : get_or(j, "faulty", json::array())) s.faulty.insert(id.get<int>());
    s.seed = get_or<std::uint64_t>(j, "seed", 0);
    if (j.contains("functions") == j.contains("generator"))
      parse_fail("scenario: give exactly one of 'functions' and 'generator'");
    if (j.contains("functions")) {
      for (const auto& f : j.at("functions")) s.functions.push_back(function_from_json(f));
    } else {
      if (s.n < 0 || s.n > 100000) parse_fail("scenario: n out of range");
      s.functions = generate_functions(j.at("generator"), s.n, s.seed);
    }
    if (j.contains("adversary")) s.adversary = adversary_from_json(j.at("adversary"));
    if (j.contains("adversary_overrides")) {
      const auto& o = j.at("adversary_overrides");
      if (!o.is_object()) parse_fail("adversary_overrides: expected an object keyed by agent id");
      for (auto it = o.begin(); it != o.end(); ++it) {
        std::size_t used = 0;
        int id = std::stoi(it.key(), &used);
        if (used != it.key().size()) parse_fail("adversary_overrides: bad agent id '" + it.key() + "'");
        s.adversary_overrides[id] = adversary_from_json(it.value());
      }
    }
    s.algorithm = algorithm_from_string(j.at("algorithm").get<std::string>());
    if (j.contains("stepsize")) {
      const auto& st = j.at("stepsize");
      if (st.is_string()) {
        if (st.get<std::string>() != "harmonic") parse_fail("stepsize: unknown schedule");
      } else {
        only_keys(st, {"scale", "power"}, "stepsize");
        s.stepsize.scale = get_or(st, "scale", 1.0);
        s.stepsize.power = get_or(st, "power", 1.0);
      }
    }
    s.max_rounds = get_or(j, "max_rounds", s.max_rounds);
    s.tol = get_or(j, "tol", s.tol);
    if (j.contains("default_function")) s.default_function = function_from_json(j.at("default_function"));
    s.default_value = get_or(j, "default_value", s.default_value);
    std::string policy = get_or<std::string>(j, "silent_policy", "isolate");
    if (policy == "isolate") s.silent_policy = SilentPolicy::Isolate;
    else if (policy == "default_value") s.silent_policy = SilentPolicy::DefaultValue;
    else parse_fail("silent_policy must be 'isolate' or 'default_value'");
    std::string trim = get_or<std::string>(j, "alg3_trim", "sign");
    if (trim == "sign") s.alg3_trim = Alg3Trim::Sign;
    else if (trim == "rank") s.alg3_trim = Alg3Trim::Rank;
    else parse_fail("alg3_trim must be 'sign' or 'rank'");
    if (j.contains("lipschitz")) s.lipschitz = j.at("lipschitz").get<double>();
    s.trace_stride = get_or(j, "trace_stride", s.trace_stride);
    s.certificate_tolerance = get_or(j, "certificate_tolerance", s.certificate_tolerance);
    s.keep_round_log = get_or(j, "keep_round_log", s.keep_round_log);
  } catch (const json::exception& e) {
    parse_fail(std::string("scenario: ") + e.what());
  } catch (const std::invalid_argument& e) {
    parse_fail(std::string("scenario: ") + e.what());
  } catch (const std::out_of_range& e) {
    parse_fail(std::string("scenario: ") + e.what());
  }
  validate(s);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) parse_fail("cannot open scenario file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    parse_fail(path.string() + ": " + e.what());
  }
  return scenario_from_json(j);
}

}  // namespace byzopt
