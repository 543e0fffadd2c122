#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <set>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "crossdiff/errors.hpp"

namespace crossdiff::cli {

using nlohmann::json;

namespace {

/// Walks one JSON object, recording every violation under its dotted path.
class Reader {
 public:
  Reader(const json* node, std::string path, std::vector<std::string>& errors)
      : node_(node), path_(std::move(path)), errors_(&errors) {
    if (node_ && !node_->is_object()) {
      fail_here("must be an object");
      node_ = nullptr;
    }
  }

  bool present() const { return node_ != nullptr; }
  const std::string& path() const { return path_; }
  std::string at(std::string_view key) const { return path_.empty() ? std::string(key) : path_ + "." + std::string(key); }

  void fail(std::string_view key, const std::string& message) { errors_->push_back(at(key) + ": " + message); }
  void fail_here(const std::string& message) { errors_->push_back((path_.empty() ? "<root>" : path_) + ": " + message); }

  void allow(std::initializer_list<std::string_view> keys) {
    if (!node_) return;
    for (const auto& [key, value] : node_->items()) {
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) fail(key, "unknown key");
    }
  }

  bool has(std::string_view key) const { return node_ && node_->contains(key); }
  const json* raw(std::string_view key) const {
    if (!has(key)) return nullptr;
    return &(*node_)[std::string(key)];
  }

  double number(std::string_view key, double fallback, const std::function<bool(double)>& ok = {},
                std::string_view requirement = {}) {
    const json* v = raw(key);
    if (!v) return fallback;
    if (!v->is_number()) {
      fail(key, "must be a number");
      return fallback;
    }
    const double x = v->get<double>();
    if (!std::isfinite(x) || (ok && !ok(x))) {
      fail(key, fmt::format("{} (got {})", requirement.empty() ? "invalid value" : requirement, v->dump()));
      return fallback;
    }
    return x;
  }

  long long integer(std::string_view key, long long fallback, const std::function<bool(long long)>& ok = {},
                    std::string_view requirement = {}) {
    const json* v = raw(key);
    if (!v) return fallback;
    if (!v->is_number_integer()) {
      fail(key, "must be an integer");
      return fallback;
    }
    const long long x = v->get<long long>();
    if (ok && !ok(x)) {
      fail(key, fmt::format("{} (got {})", requirement.empty() ? "invalid value" : requirement, x));
      return fallback;
    }
    return x;
  }

  std::string text(std::string_view key, std::string fallback) {
    const json* v = raw(key);
    if (!v) return fallback;
    if (!v->is_string()) {
      fail(key, "must be a string");
      return fallback;
    }
    return v->get<std::string>();
  }

  std::string choice(std::string_view key, std::string fallback, std::initializer_list<std::string_view> options) {
    std::string value = text(key, fallback);
    if (std::find(options.begin(), options.end(), value) == options.end()) {
      std::string list;
      for (auto o : options) list += (list.empty() ? "" : ", ") + std::string(o);
      fail(key, fmt::format("must be one of {{{}}} (got \"{}\")", list, value));
      return fallback;
    }
    return value;
  }

  std::vector<double> numbers(std::string_view key) {
    std::vector<double> out;
    const json* v = raw(key);
    if (!v) return out;
    if (!v->is_array()) {
      fail(key, "must be an array of numbers");
      return out;
    }
    for (std::size_t i = 0; i < v->size(); ++i) {
      const json& e = (*v)[i];
      if (!e.is_number() || !std::isfinite(e.get<double>())) {
        fail(fmt::format("{}[{}]", key, i), "must be a finite number");
        continue;
      }
      out.push_back(e.get<double>());
    }
    return out;
  }

  Reader child(std::string_view key) { return Reader(raw(key), at(key), *errors_); }

 private:
  const json* node_;
  std::string path_;
  std::vector<std::string>* errors_;
};

auto positive = [](double x) { return x > 0.0; };
auto nonnegative = [](double x) { return x >= 0.0; };

/// Inline (x, y) arrays or a two-column CSV file with columns x, y.
Table read_table(Reader& r, const std::filesystem::path& base_dir) {
  std::vector<double> xs, ys;
  if (r.has("file")) {
    if (r.has("x") || r.has("y")) r.fail("file", "give either file or x/y, not both");
    const std::filesystem::path file = base_dir / r.text("file", "");
    try {
      const CsvTable t = read_csv(file);
      if (t.columns.size() < 2) throw IOError("table CSV needs two columns");
      for (const auto& row : t.rows) {
        if (!row[0] || !row[1]) throw IOError("table CSV has empty cells");
        xs.push_back(*row[0]);
        ys.push_back(*row[1]);
      }
    } catch (const IOError& e) {
      r.fail("file", e.what());
      return {};
    }
  } else {
    xs = r.numbers("x");
    ys = r.numbers("y");
  }
  if (xs.size() < 2 || xs.size() != ys.size()) {
    r.fail_here("table needs matching x and y with at least two points");
    return {};
  }
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (!(xs[i] > xs[i - 1])) {
      r.fail("x", "abscissae must be strictly increasing");
      return {};
    }
  }
  return Table(std::move(xs), std::move(ys));
}

Profile read_profile(Reader r, Profile fallback, const std::filesystem::path& base_dir) {
  if (!r.present()) return fallback;
  r.allow({"kind", "coeff", "x", "y", "file"});
  const std::string kind = r.choice("kind", "zero", {"zero", "linear", "quadratic", "table"});
  if (kind == "zero") return Profile::zero();
  if (kind == "linear") return Profile::linear(r.number("coeff", 0.0));
  if (kind == "quadratic") return Profile::quadratic(r.number("coeff", 1.0));
  return Profile::tabulated(read_table(r, base_dir));
}

Kernel read_kernel(Reader r, const std::filesystem::path& base_dir) {
  if (!r.present()) return Kernel::zero();
  r.allow({"kind", "amplitude", "sigma", "radius", "x", "y", "file"});
  const std::string kind = r.choice("kind", "zero", {"zero", "gaussian", "table"});
  if (kind == "zero") return Kernel::zero();
  if (kind == "gaussian") {
    const double amplitude = r.number("amplitude", 1.0);
    const double sigma = r.number("sigma", 0.1, positive, "must be > 0");
    const double radius = r.number("radius", 0.0, nonnegative, "must be >= 0");
    return Kernel::gaussian(amplitude, sigma, radius);
  }
  return Kernel::tabulated(read_table(r, base_dir));
}

GrowthLaw read_growth(Reader r, GrowthLaw fallback, const std::filesystem::path& base_dir) {
  if (!r.present()) return fallback;
  r.allow({"kind", "rate", "cap", "x", "y", "file"});
  const std::string kind = r.choice("kind", "zero", {"zero", "logistic", "table"});
  if (kind == "zero") return GrowthLaw::zero();
  if (kind == "logistic") {
    return GrowthLaw::logistic(r.number("rate", 1.0), r.number("cap", 1.0, positive, "must be > 0"));
  }
  GrowthLaw g;
  g.kind = GrowthLaw::Kind::Tabulated;
  g.table = read_table(r, base_dir);
  return g;
}

struct ModelPreset {
  ModelSpec model;
  InitialPreset initial;
};

ModelPreset model_preset(const std::string& name) {
  if (name == "heat") {
    ModelSpec m;
    m.pressure.alpha = 1.0;
    m.epsilon = 0.05;
    return {m, InitialPreset::Gaussian};
  }
  if (name == "barenblatt") {
    ModelSpec m;
    m.pressure.alpha = 2.0;
    m.epsilon = 1e-4;
    return {m, InitialPreset::Barenblatt};
  }
  if (name == "confined") {
    ModelSpec m;
    m.pressure.alpha = 2.0;
    m.v1 = Profile::quadratic(1.0);
    m.v2 = Profile::quadratic(1.0);
    return {m, InitialPreset::Box};
  }
  if (name == "growth") {
    ModelSpec m = ModelSpec::demo(1e-3);
    m.g1 = GrowthLaw::logistic(1.0, 2.0);
    m.g2 = GrowthLaw::logistic(1.0, 2.0);
    return {m, InitialPreset::TwoBumpMixed};
  }
  return {ModelSpec::demo(1e-3), InitialPreset::TwoBumpMixed};
}

const char* preset_name(InitialPreset p) {
  switch (p) {
    case InitialPreset::Zero: return "zero";
    case InitialPreset::Box: return "box";
    case InitialPreset::Gaussian: return "gaussian";
    case InitialPreset::Barenblatt: return "barenblatt";
    case InitialPreset::TwoBumpMixed: return "two_bump_mixed";
    case InitialPreset::Csv: return "csv";
  }
  return "zero";
}

InitialPreset preset_from(const std::string& name) {
  if (name == "zero") return InitialPreset::Zero;
  if (name == "box") return InitialPreset::Box;
  if (name == "gaussian") return InitialPreset::Gaussian;
  if (name == "barenblatt") return InitialPreset::Barenblatt;
  if (name == "csv") return InitialPreset::Csv;
  return InitialPreset::TwoBumpMixed;
}

std::optional<LawSpec> read_law(const json& e, const std::string& path, std::vector<std::string>& errors) {
  if (e.is_string()) {
    const std::string name = e.get<std::string>();
    if (name == "entropy") return LawSpec::entropy();
    if (name == "ratio_squared") return LawSpec::ratio_squared();
    if (name == "weak_form_u") return LawSpec{Law::WeakFormU, 1.0};
    if (name == "weak_form_v") return LawSpec{Law::WeakFormV, 1.0};
    if (name == "energy_identity") return LawSpec{Law::EnergyIdentity, 1.0};
    errors.push_back(path + ": unknown law \"" + name + "\"");
    return std::nullopt;
  }
  Reader r(&e, path, errors);
  if (!r.present()) return std::nullopt;
  r.allow({"law", "theta"});
  const std::string name = r.choice("law", "ratio_theta", {"ratio_theta"});
  (void)name;
  return LawSpec::ratio_theta(r.number("theta", 2.0, positive, "must be > 0"));
}

std::string law_key(const LawSpec& law) {
  switch (law.law) {
    case Law::Entropy: return "entropy";
    case Law::RatioSquared: return "ratio_squared";
    case Law::RatioTheta: return "ratio_theta";
    case Law::WeakFormU: return "weak_form_u";
    case Law::WeakFormV: return "weak_form_v";
    case Law::EnergyIdentity: return "energy_identity";
  }
  return "entropy";
}

json table_json(const Table& t) { return json{{"x", t.xs()}, {"y", t.ys()}}; }

json profile_json(const Profile& p) {
  switch (p.kind) {
    case Profile::Kind::Zero: return json{{"kind", "zero"}};
    case Profile::Kind::Linear: return json{{"kind", "linear"}, {"coeff", p.coeff}};
    case Profile::Kind::Quadratic: return json{{"kind", "quadratic"}, {"coeff", p.coeff}};
    case Profile::Kind::Tabulated: {
      json j = table_json(p.table);
      j["kind"] = "table";
      return j;
    }
  }
  return json{};
}

json kernel_json(const Kernel& k) {
  switch (k.kind) {
    case Kernel::Kind::Zero: return json{{"kind", "zero"}};
    case Kernel::Kind::Gaussian:
      return json{{"kind", "gaussian"}, {"amplitude", k.amplitude}, {"sigma", k.sigma}, {"radius", k.radius}};
    case Kernel::Kind::Tabulated: {
      json j = table_json(k.table);
      j["kind"] = "table";
      return j;
    }
  }
  return json{};
}

json growth_json(const GrowthLaw& g) {
  switch (g.kind) {
    case GrowthLaw::Kind::Zero: return json{{"kind", "zero"}};
    case GrowthLaw::Kind::Logistic: return json{{"kind", "logistic"}, {"rate", g.rate}, {"cap", g.cap}};
    case GrowthLaw::Kind::Tabulated: {
      json j = table_json(g.table);
      j["kind"] = "table";
      return j;
    }
  }
  return json{};
}

/// Integers become doubles so that 1 and 1.0 hash alike.
json normalise_numbers(const json& j) {
  if (j.is_number()) return json(j.get<double>());
  if (j.is_array() || j.is_object()) {
    json out = j;
    for (auto& item : out) item = normalise_numbers(item);
    return out;
  }
  return j;
}

double initial_mass(const InitialSpec& init, const GridSpec& grid, double alpha) {
  const State st = init.build(grid, alpha);
  return integrate(st.u) + integrate(st.v);
}

}  // namespace

State InitialSpec::build(const GridSpec& grid, double alpha) const {
  State st{t0, Field(grid), Field(grid)};
  const bool to_u = species != "v";
  const bool to_v = species == "v" || species == "both";
  auto assign = [&](const Field& f) {
    if (to_u) st.u = f;
    if (to_v) st.v = f;
  };
  switch (preset) {
    case InitialPreset::Zero: break;
    case InitialPreset::Box:
      assign(Field::from_function(grid, [&](double x) { return std::abs(x - center) < half_width ? height : 0.0; }));
      break;
    case InitialPreset::Gaussian: {
      const double norm = mass / std::sqrt(2.0 * std::numbers::pi * sigma * sigma);
      assign(Field::from_function(grid, [&](double x) {
        const double z = (x - center) / sigma;
        return norm * std::exp(-0.5 * z * z);
      }));
      break;
    }
    case InitialPreset::Barenblatt: assign(evaluate(Barenblatt{alpha, mass, 0.0}, t0, grid)); break;
    case InitialPreset::TwoBumpMixed: {
      auto bump = [&](double x, double c) {
        const double z = (x - c) / half_width;
        return std::abs(z) < 1.0 ? height * std::pow(1.0 - z * z, 3) : 0.0;
      };
      st.u = Field::from_function(grid, [&](double x) { return bump(x, center - offset); });
      st.v = Field::from_function(grid, [&](double x) { return bump(x, center + offset); });
      break;
    }
    case InitialPreset::Csv: {
      st = state_from_csv(table, grid);
      st.t = t0;
      break;
    }
  }
  return st;
}

RunConfig parse_config(const json& doc, const std::filesystem::path& base_dir) {
  std::vector<std::string> errors;
  Reader root(&doc, "", errors);
  if (!root.present()) throw SchemaError(errors);
  root.allow({"description", "grid", "model", "initial", "solver", "sweep", "oracle", "diagnose", "outputs"});
  if (root.has("description") && !root.raw("description")->is_string()) root.fail("description", "must be a string");

  RunConfig cfg;

  Reader grid = root.child("grid");
  grid.allow({"x_min", "x_max", "n_cells", "boundary"});
  cfg.grid.x_min = grid.number("x_min", -2.0);
  cfg.grid.x_max = grid.number("x_max", 2.0);
  cfg.grid.n_cells =
      static_cast<int>(grid.integer("n_cells", 512, [](long long n) { return n >= 4 && n <= (1 << 24); }, "must be in [4, 2^24]"));
  cfg.grid.boundary = grid.choice("boundary", "no_flux", {"no_flux", "periodic"}) == "periodic" ? Boundary::Periodic
                                                                                                 : Boundary::NoFlux;
  if (!(cfg.grid.x_max > cfg.grid.x_min)) grid.fail("x_max", "must exceed x_min");

  Reader model = root.child("model");
  model.allow({"preset", "pressure", "epsilon", "potentials", "kernels", "growth"});
  cfg.model_preset = model.choice("preset", "demo", {"demo", "heat", "barenblatt", "confined", "growth"});
  const ModelPreset preset = model_preset(cfg.model_preset);
  cfg.model = preset.model;
  {
    Reader pressure = model.child("pressure");
    pressure.allow({"alpha", "weights"});
    cfg.model.pressure.alpha = pressure.number("alpha", cfg.model.pressure.alpha, positive, "must be > 0");
    if (pressure.has("weights")) {
      const auto w = pressure.numbers("weights");
      if (w.size() != 2) {
        pressure.fail("weights", "must hold exactly two numbers [c_u, c_v]");
      } else if (!(w[0] > 0.0) || !(w[1] > 0.0)) {
        pressure.fail("weights", "must be > 0");
      } else {
        cfg.model.pressure.weight_u = w[0];
        cfg.model.pressure.weight_v = w[1];
      }
    }
    cfg.model.epsilon = model.number("epsilon", cfg.model.epsilon, nonnegative, "must be >= 0");
    Reader potentials = model.child("potentials");
    potentials.allow({"v1", "v2"});
    cfg.model.v1 = read_profile(potentials.child("v1"), cfg.model.v1, base_dir);
    cfg.model.v2 = read_profile(potentials.child("v2"), cfg.model.v2, base_dir);
    Reader kernels = model.child("kernels");
    kernels.allow({"k11", "k12", "k21", "k22"});
    cfg.model.kernels.k11 = read_kernel(kernels.child("k11"), base_dir);
    cfg.model.kernels.k12 = read_kernel(kernels.child("k12"), base_dir);
    cfg.model.kernels.k21 = read_kernel(kernels.child("k21"), base_dir);
    cfg.model.kernels.k22 = read_kernel(kernels.child("k22"), base_dir);
    Reader growth = model.child("growth");
    growth.allow({"g1", "g2"});
    cfg.model.g1 = read_growth(growth.child("g1"), cfg.model.g1, base_dir);
    cfg.model.g2 = read_growth(growth.child("g2"), cfg.model.g2, base_dir);
  }

  Reader initial = root.child("initial");
  initial.allow({"preset", "t0", "species", "height", "center", "half_width", "mass", "sigma", "offset", "file"});
  InitialSpec& init = cfg.initial;
  init.preset = preset_from(initial.choice("preset", preset_name(preset.initial),
                                           {"zero", "box", "gaussian", "barenblatt", "two_bump_mixed", "csv"}));
  init.t0 = initial.number("t0", init.preset == InitialPreset::Barenblatt ? 0.5 : 0.0);
  init.species = initial.choice("species", "u", {"u", "v", "both"});
  init.height = initial.number("height", 1.0, nonnegative, "must be >= 0");
  init.center = initial.number("center", 0.0);
  init.half_width = initial.number("half_width", init.preset == InitialPreset::TwoBumpMixed ? 0.75 : 0.5, positive,
                                   "must be > 0");
  init.mass = initial.number("mass", 1.0, positive, "must be > 0");
  init.sigma = initial.number("sigma", 0.25, positive, "must be > 0");
  init.offset = initial.number("offset", 0.25);
  if (init.preset == InitialPreset::Barenblatt) {
    if (!(init.t0 > 0.0)) initial.fail("t0", "must be > 0 for the barenblatt preset");
    if (!(cfg.model.pressure.alpha > 1.0)) initial.fail("preset", "barenblatt needs model.pressure.alpha > 1");
  }
  if (init.preset == InitialPreset::Csv) {
    if (!initial.has("file")) {
      initial.fail("file", "required for the csv preset");
    } else {
      init.file = initial.text("file", "");
      try {
        init.table = read_csv(base_dir / init.file);
        (void)state_from_csv(init.table, cfg.grid);
      } catch (const std::exception& e) {
        initial.fail("file", e.what());
      }
    }
  } else if (initial.has("file")) {
    initial.fail("file", "only used by the csv preset");
  }

  Reader solver = root.child("solver");
  solver.allow({"cfl", "t_end", "output_every", "output_interval", "max_steps", "positivity_floor", "fixed_dt",
                "reconstruction"});
  SolverParams& sp = cfg.solver;
  sp.cfl = solver.number("cfl", 0.4, positive, "must be > 0");
  sp.t_end = solver.number("t_end", init.t0 + 1.0);
  if (!(sp.t_end > init.t0)) solver.fail("t_end", fmt::format("must exceed the initial time {}", init.t0));
  sp.output_every = static_cast<int>(solver.integer("output_every", 100, [](long long n) { return n >= 1; }, "must be >= 1"));
  sp.output_interval = solver.number("output_interval", 0.0, nonnegative, "must be >= 0");
  sp.max_steps = solver.integer("max_steps", 10'000'000, [](long long n) { return n >= 1; }, "must be >= 1");
  sp.positivity_floor = solver.number("positivity_floor", 0.0, nonnegative, "must be >= 0");
  sp.fixed_dt = solver.number("fixed_dt", 0.0, nonnegative, "must be >= 0");
  sp.reconstruction =
      solver.choice("reconstruction", "minmod", {"minmod", "donor"}) == "donor" ? Reconstruction::Donor : Reconstruction::Minmod;

  if (root.has("sweep")) {
    Reader sweep = root.child("sweep");
    sweep.allow({"eps_ladder", "grid_ladder", "snapshots", "coarse_dt", "coarse_dx", "s_tol_rel", "v_tol_rel"});
    SweepConfig sc;
    sc.eps_ladder = sweep.numbers("eps_ladder");
    if (!sweep.has("eps_ladder")) sweep.fail("eps_ladder", "required");
    if (sweep.has("eps_ladder") && sc.eps_ladder.size() < 3) sweep.fail("eps_ladder", "needs at least 3 rungs");
    for (std::size_t k = 0; k < sc.eps_ladder.size(); ++k) {
      if (!(sc.eps_ladder[k] > 0.0)) sweep.fail(fmt::format("eps_ladder[{}]", k), "must be > 0");
      if (k > 0 && !(sc.eps_ladder[k] < sc.eps_ladder[k - 1])) {
        sweep.fail("eps_ladder", fmt::format("must be strictly decreasing (entry {} = {} after {})", k,
                                             sc.eps_ladder[k], sc.eps_ladder[k - 1]));
      }
    }
    for (double n : sweep.numbers("grid_ladder")) {
      if (n != std::floor(n) || n < 4) {
        sweep.fail("grid_ladder", "entries must be integers >= 4");
        break;
      }
      sc.grid_ladder.push_back(static_cast<int>(n));
    }
    for (std::size_t k = 1; k < sc.grid_ladder.size(); ++k) {
      if (sc.grid_ladder[k] <= sc.grid_ladder[k - 1] || sc.grid_ladder[k] % sc.grid_ladder[k - 1] != 0) {
        sweep.fail("grid_ladder", "each entry must be a multiple of the previous one");
        break;
      }
    }
    sc.snapshots = static_cast<int>(sweep.integer("snapshots", 200, [](long long n) { return n >= 2; }, "must be >= 2"));
    sc.coarse.dt = sweep.number("coarse_dt", 0.0, nonnegative, "must be >= 0");
    sc.coarse.dx = sweep.number("coarse_dx", 0.0, nonnegative, "must be >= 0");
    sc.mask.s_rel = sweep.number("s_tol_rel", 1e-8, nonnegative, "must be >= 0");
    sc.mask.v_rel = sweep.number("v_tol_rel", 1e-6, nonnegative, "must be >= 0");
    cfg.sweep = sc;
  }

  const bool grid_ok = errors.empty();
  if (root.has("oracle")) {
    Reader oracle = root.child("oracle");
    oracle.allow({"kind", "diffusivity", "mass", "t_offset", "center", "alpha", "curvature"});
    const std::string kind = oracle.choice("kind", "gaussian_heat", {"gaussian_heat", "barenblatt", "confined"});
    if (kind == "gaussian_heat") {
      cfg.oracle = GaussianHeat{oracle.number("diffusivity", 1.0, positive, "must be > 0"),
                                oracle.number("mass", 1.0, positive, "must be > 0"),
                                oracle.number("t_offset", 0.0, nonnegative, "must be >= 0"), oracle.number("center", 0.0)};
    } else if (kind == "barenblatt") {
      cfg.oracle = Barenblatt{oracle.number("alpha", cfg.model.pressure.alpha, [](double a) { return a > 1.0; }, "must be > 1"),
                              oracle.number("mass", 1.0, positive, "must be > 0"), oracle.number("t_offset", 0.0)};
    } else {
      cfg.oracle = ConfinedSteadyState{oracle.number("alpha", cfg.model.pressure.alpha, [](double a) { return a >= 1.0; }, "must be >= 1"),
                                       oracle.number("curvature", 1.0, positive, "must be > 0"),
                                       oracle.number("mass", 1.0, positive, "must be > 0")};
    }
  } else if (grid_ok) {
    // Presets with a closed-form reference get it by default.
    const double alpha = cfg.model.pressure.alpha;
    if (cfg.model_preset == "heat" && init.preset == InitialPreset::Gaussian && alpha == 1.0) {
      const double d = 1.0 + cfg.model.epsilon;
      cfg.oracle = GaussianHeat{d, init.mass, init.sigma * init.sigma / (2.0 * d) - init.t0, init.center};
    } else if (cfg.model_preset == "barenblatt" && init.preset == InitialPreset::Barenblatt) {
      cfg.oracle = Barenblatt{alpha, init.mass, 0.0};
    } else if (cfg.model_preset == "confined" && cfg.model.v1.kind == Profile::Kind::Quadratic && alpha >= 1.0) {
      cfg.oracle = ConfinedSteadyState{alpha, cfg.model.v1.coeff, initial_mass(init, cfg.grid, alpha)};
    }
  }

  Reader diag = root.child("diagnose");
  diag.allow({"test_functions", "laws"});
  const double span = sp.t_end - init.t0;
  if (const json* tfs = diag.raw("test_functions")) {
    if (!tfs->is_array()) {
      diag.fail("test_functions", "must be an array");
    } else {
      for (std::size_t i = 0; i < tfs->size(); ++i) {
        Reader tf(&(*tfs)[i], fmt::format("diagnose.test_functions[{}]", i), errors);
        tf.allow({"id", "t_center", "t_half_width", "x_center", "x_half_width"});
        TestFunction f;
        f.id = tf.text("id", fmt::format("phi{}", i));
        f.time = {tf.number("t_center", init.t0 + 0.5 * span), tf.number("t_half_width", 0.4 * span, positive, "must be > 0")};
        f.space = {tf.number("x_center", 0.0), tf.number("x_half_width", 0.5, positive, "must be > 0")};
        if (f.space.lower() <= cfg.grid.x_min || f.space.upper() >= cfg.grid.x_max) {
          tf.fail("x_center", "spatial support must lie strictly inside the domain");
        }
        if (f.time.lower() < init.t0 || f.time.upper() > sp.t_end) {
          tf.fail("t_center", "time support must lie inside [t0, t_end]");
        }
        cfg.diagnose.test_functions.push_back(f);
      }
    }
  } else {
    const double l = cfg.grid.length();
    const double x0 = cfg.grid.x_min;
    const Bump time{init.t0 + 0.5 * span, 0.4 * span};
    cfg.diagnose.test_functions = {{"a", time, {x0 + 0.375 * l, 0.125 * l}},
                                   {"b", time, {x0 + 0.5 * l, 0.125 * l}},
                                   {"c", time, {x0 + 0.65 * l, 0.1 * l}}};
  }
  if (const json* laws = diag.raw("laws")) {
    if (!laws->is_array()) {
      diag.fail("laws", "must be an array");
    } else {
      for (std::size_t i = 0; i < laws->size(); ++i) {
        if (auto law = read_law((*laws)[i], fmt::format("diagnose.laws[{}]", i), errors)) {
          cfg.diagnose.laws.push_back(*law);
        }
      }
    }
  } else {
    cfg.diagnose.laws = {LawSpec::entropy(), LawSpec::ratio_squared(), LawSpec::ratio_theta(2.0)};
  }

  Reader outputs = root.child("outputs");
  outputs.allow({"directory", "formats"});
  cfg.outputs.directory = base_dir / outputs.text("directory", "out");
  if (const json* formats = outputs.raw("formats")) {
    cfg.outputs.csv = cfg.outputs.json = cfg.outputs.svg = false;
    if (!formats->is_array()) {
      outputs.fail("formats", "must be an array");
    } else {
      for (const auto& f : *formats) {
        const std::string name = f.is_string() ? f.get<std::string>() : "";
        if (name == "csv") cfg.outputs.csv = true;
        else if (name == "json") cfg.outputs.json = true;
        else if (name == "svg") cfg.outputs.svg = true;
        else outputs.fail("formats", fmt::format("unknown format {}", f.dump()));
      }
    }
  }

  if (!errors.empty()) throw SchemaError(errors);
  return cfg;
}

RunConfig parse_config(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError({fmt::format("{}: not valid JSON: {}", path.string(), e.what())});
  }
  return parse_config(doc, path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
}

json canonical_json(const RunConfig& c) {
  json j;
  j["grid"] = {{"x_min", c.grid.x_min},
               {"x_max", c.grid.x_max},
               {"n_cells", c.grid.n_cells},
               {"boundary", c.grid.boundary == Boundary::Periodic ? "periodic" : "no_flux"}};
  j["model"] = {{"pressure", {{"alpha", c.model.pressure.alpha},
                              {"weights", {c.model.pressure.weight_u, c.model.pressure.weight_v}}}},
                {"epsilon", c.model.epsilon},
                {"potentials", {{"v1", profile_json(c.model.v1)}, {"v2", profile_json(c.model.v2)}}},
                {"kernels",
                 {{"k11", kernel_json(c.model.kernels.k11)},
                  {"k12", kernel_json(c.model.kernels.k12)},
                  {"k21", kernel_json(c.model.kernels.k21)},
                  {"k22", kernel_json(c.model.kernels.k22)}}},
                {"growth", {{"g1", growth_json(c.model.g1)}, {"g2", growth_json(c.model.g2)}}}};
  const InitialSpec& i = c.initial;
  json init{{"preset", preset_name(i.preset)}, {"t0", i.t0}};
  switch (i.preset) {
    case InitialPreset::Zero: break;
    case InitialPreset::Box:
      init.update({{"species", i.species}, {"height", i.height}, {"center", i.center}, {"half_width", i.half_width}});
      break;
    case InitialPreset::Gaussian:
      init.update({{"species", i.species}, {"mass", i.mass}, {"center", i.center}, {"sigma", i.sigma}});
      break;
    case InitialPreset::Barenblatt: init.update({{"species", i.species}, {"mass", i.mass}}); break;
    case InitialPreset::TwoBumpMixed:
      init.update({{"height", i.height}, {"center", i.center}, {"half_width", i.half_width}, {"offset", i.offset}});
      break;
    case InitialPreset::Csv: init["data"] = to_csv(i.table); break;
  }
  j["initial"] = init;
  const SolverParams& s = c.solver;
  j["solver"] = {{"cfl", s.cfl},
                 {"t_end", s.t_end},
                 {"output_every", s.output_every},
                 {"output_interval", s.output_interval},
                 {"max_steps", s.max_steps},
                 {"positivity_floor", s.positivity_floor},
                 {"fixed_dt", s.fixed_dt},
                 {"reconstruction", s.reconstruction == Reconstruction::Donor ? "donor" : "minmod"}};
  if (c.sweep) {
    j["sweep"] = {{"eps_ladder", c.sweep->eps_ladder},      {"grid_ladder", c.sweep->grid_ladder},
                  {"snapshots", c.sweep->snapshots},        {"coarse_dt", c.sweep->coarse.dt},
                  {"coarse_dx", c.sweep->coarse.dx},        {"s_tol_rel", c.sweep->mask.s_rel},
                  {"v_tol_rel", c.sweep->mask.v_rel}};
  }
  if (c.oracle) {
    j["oracle"] = std::visit(
        [](const auto& o) -> json {
          using T = std::decay_t<decltype(o)>;
          if constexpr (std::is_same_v<T, GaussianHeat>) {
            return {{"kind", "gaussian_heat"}, {"diffusivity", o.diffusivity}, {"mass", o.mass},
                    {"t_offset", o.t_offset}, {"center", o.center}};
          } else if constexpr (std::is_same_v<T, Barenblatt>) {
            return {{"kind", "barenblatt"}, {"alpha", o.alpha}, {"mass", o.mass}, {"t_offset", o.t_offset}};
          } else {
            return {{"kind", "confined"}, {"alpha", o.alpha}, {"curvature", o.curvature}, {"mass", o.mass}};
          }
        },
        *c.oracle);
  }
  json tfs = json::array();
  for (const auto& f : c.diagnose.test_functions) {
    tfs.push_back({{"id", f.id},
                   {"t_center", f.time.center},
                   {"t_half_width", f.time.half_width},
                   {"x_center", f.space.center},
                   {"x_half_width", f.space.half_width}});
  }
  json laws = json::array();
  for (const auto& l : c.diagnose.laws) {
    if (l.law == Law::RatioTheta) {
      laws.push_back({{"law", "ratio_theta"}, {"theta", l.theta}});
    } else {
      laws.push_back(law_key(l));
    }
  }
  j["diagnose"] = {{"test_functions", tfs}, {"laws", laws}};
  return normalise_numbers(j);
}

std::string config_hash(const RunConfig& config) {
  const std::string text = canonical_json(config).dump();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw IOError("SHA-256 computation failed");
  }
  std::string hex;
  for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

json config_schema() {
  auto num = [](const char* description) { return json{{"type", "number"}, {"description", description}}; };
  auto table_kind = [&](std::initializer_list<const char*> kinds, json extra) {
    json props{{"kind", {{"enum", kinds}}}, {"x", {{"type", "array"}, {"items", {{"type", "number"}}}}},
               {"y", {{"type", "array"}, {"items", {{"type", "number"}}}}},
               {"file", {{"type", "string"}, {"description", "CSV with columns x, y, relative to the config"}}}};
    props.update(extra);
    return json{{"type", "object"}, {"additionalProperties", false}, {"properties", props}};
  };
  const json profile = table_kind({"zero", "linear", "quadratic", "table"},
                                  {{"coeff", num("linear: V = coeff x; quadratic: V = coeff x^2/2")}});
  const json kernel = table_kind({"zero", "gaussian", "table"},
                                 {{"amplitude", num("peak value")},
                                  {"sigma", num("width, > 0")},
                                  {"radius", num("truncation half-width, 0 selects 4 sigma")}});
  const json growth = table_kind({"zero", "logistic", "table"}, {{"rate", num("G(s) = rate (1 - s/cap)")}, {"cap", num("> 0")}});
  auto object = [](json props) {
    return json{{"type", "object"}, {"additionalProperties", false}, {"properties", std::move(props)}};
  };
  return {
      {"$schema", "https://json-schema.org/draft/2020-12/schema"},
      {"title", "crossdiff run configuration"},
      {"type", "object"},
      {"additionalProperties", false},
      {"properties",
       {{"description", {{"type", "string"}}},
        {"grid", object({{"x_min", num("default -2")},
                         {"x_max", num("default 2")},
                         {"n_cells", {{"type", "integer"}, {"minimum", 4}}},
                         {"boundary", {{"enum", {"no_flux", "periodic"}}}}})},
        {"model", object({{"preset", {{"enum", {"demo", "heat", "barenblatt", "confined", "growth"}}}},
                          {"pressure", object({{"alpha", num("> 0")},
                                               {"weights", {{"type", "array"}, {"minItems", 2}, {"maxItems", 2}}}})},
                          {"epsilon", num(">= 0")},
                          {"potentials", object({{"v1", profile}, {"v2", profile}})},
                          {"kernels", object({{"k11", kernel}, {"k12", kernel}, {"k21", kernel}, {"k22", kernel}})},
                          {"growth", object({{"g1", growth}, {"g2", growth}})}})},
        {"initial", object({{"preset", {{"enum", {"zero", "box", "gaussian", "barenblatt", "two_bump_mixed", "csv"}}}},
                            {"t0", num("initial time")},
                            {"species", {{"enum", {"u", "v", "both"}}}},
                            {"height", num("box and bump height")},
                            {"center", num("")},
                            {"half_width", num("box half-width or bump radius")},
                            {"mass", num("gaussian and barenblatt mass")},
                            {"sigma", num("gaussian standard deviation")},
                            {"offset", num("two_bump_mixed: centres at center -/+ offset")},
                            {"file", {{"type", "string"}, {"description", "csv preset: columns x, u[, v]"}}}})},
        {"solver", object({{"cfl", num("> 0")},
                           {"t_end", num("> t0")},
                           {"output_every", {{"type", "integer"}, {"minimum", 1}}},
                           {"output_interval", num("> 0 switches to a uniform output time grid")},
                           {"max_steps", {{"type", "integer"}, {"minimum", 1}}},
                           {"positivity_floor", num(">= 0")},
                           {"fixed_dt", num("> 0 disables adaptive steps")},
                           {"reconstruction", {{"enum", {"minmod", "donor"}}}}})},
        {"sweep", object({{"eps_ladder", {{"type", "array"}, {"minItems", 3}, {"items", {{"type", "number"}}}}},
                          {"grid_ladder", {{"type", "array"}, {"items", {{"type", "integer"}}}}},
                          {"snapshots", {{"type", "integer"}, {"minimum", 2}}},
                          {"coarse_dt", num("0 selects (t_end - t0)/20")},
                          {"coarse_dx", num("0 selects domain length/50")},
                          {"s_tol_rel", num("default 1e-8")},
                          {"v_tol_rel", num("default 1e-6")}})},
        {"oracle", object({{"kind", {{"enum", {"gaussian_heat", "barenblatt", "confined"}}}},
                           {"diffusivity", num("")},
                           {"mass", num("")},
                           {"t_offset", num("")},
                           {"center", num("")},
                           {"alpha", num("")},
                           {"curvature", num("")}})},
        {"diagnose",
         object({{"test_functions",
                  {{"type", "array"},
                   {"items", object({{"id", {{"type", "string"}}},
                                     {"t_center", num("")},
                                     {"t_half_width", num("")},
                                     {"x_center", num("")},
                                     {"x_half_width", num("")}})}}},
                 {"laws", {{"type", "array"}}}})},
        {"outputs", object({{"directory", {{"type", "string"}}},
                            {"formats", {{"type", "array"}, {"items", {{"enum", {"csv", "json", "svg"}}}}}}})}}}};
}

}  // namespace crossdiff::cli
