#include "pointflow/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include <openssl/evp.h>

#include "json.hpp"
#include "pointflow/adjoint.hpp"
#include "pointflow/norms.hpp"
#include "pointflow/optimizer.hpp"
#include "pointflow/reduced_problem.hpp"
#include "pointflow/vtk.hpp"

namespace pointflow {

using nlohmann::json;

namespace {

constexpr RunMode kModes[] = {RunMode::solve,         RunMode::optimize, RunMode::gradient_check,
                              RunMode::hessian_check, RunMode::ssc,      RunMode::regularity_study};

// ---- parsing -----------------------------------------------------------

[[noreturn]] void fail(const std::string& field, const std::string& what) { throw ConfigError(field, what); }

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(where, where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) == allowed.end()) {
      fail(where.empty() ? key : where + "." + key, "unknown field " + (where.empty() ? key : where + "." + key));
    }
  }
}

double get_number(const json& obj, const char* key, const std::string& field, double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) fail(field, field + " must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(field, field + " must be finite");
  return d;
}

int get_int(const json& obj, const char* key, const std::string& field, int fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) fail(field, field + " must be an integer");
  return v.get<int>();
}

Vec2 get_pair(const json& v, const std::string& field) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    fail(field, field + " must be a pair of numbers");
  }
  const Vec2 p(v[0].get<double>(), v[1].get<double>());
  if (!p.allFinite()) fail(field, field + " must be finite");
  return p;
}

RunMode parse_mode(const std::string& s) {
  for (auto m : kModes) {
    if (s == to_string(m)) return m;
  }
  fail("mode", "mode must be one of solve, optimize, gradient-check, hessian-check, ssc, regularity-study");
}

ExperimentConfig from_json(const json& j) {
  check_keys(j, "", {"mesh", "physics", "sources", "target", "mode", "tolerances", "checks", "regularity", "output",
                     "seed"});
  ExperimentConfig c;

  const json mesh = j.value("mesh", json::object());
  check_keys(mesh, "mesh", {"n", "grading_levels", "grading_ratio"});
  c.n = get_int(mesh, "n", "mesh.n", c.n);
  c.grading_levels = get_int(mesh, "grading_levels", "mesh.grading_levels", c.grading_levels);
  c.grading_ratio = get_number(mesh, "grading_ratio", "mesh.grading_ratio", c.grading_ratio);
  if (c.n < 2 || c.n > 512) fail("mesh.n", "mesh.n must lie in [2,512]");
  if (c.grading_levels < 0 || c.grading_levels > 30) fail("mesh.grading_levels", "mesh.grading_levels must lie in [0,30]");
  if (!(c.grading_ratio > 0.0 && c.grading_ratio < 1.0)) fail("mesh.grading_ratio", "mesh.grading_ratio must lie in (0,1)");

  const json phys = j.value("physics", json::object());
  check_keys(phys, "physics", {"nu", "eta", "alpha"});
  c.nu = get_number(phys, "nu", "physics.nu", c.nu);
  c.eta = get_number(phys, "eta", "physics.eta", c.eta);
  c.alpha = get_number(phys, "alpha", "physics.alpha", c.alpha);
  if (!(c.nu > 0.0)) fail("physics.nu", "nu must be positive");
  if (!(c.eta > 0.0)) fail("physics.eta", "eta must be positive");
  if (!(c.alpha > 0.0 && c.alpha < 2.0)) fail("physics.alpha", "alpha must lie in (0,2)");

  if (!j.contains("sources") || !j.at("sources").is_array() || j.at("sources").empty()) {
    fail("sources", "sources must be a nonempty array");
  }
  const auto domain = PolygonDomain::unit_square();
  for (std::size_t i = 0; i < j.at("sources").size(); ++i) {
    const auto& s = j.at("sources")[i];
    const std::string f = "sources[" + std::to_string(i) + "]";
    check_keys(s, f, {"point", "lower", "upper", "control"});
    if (!s.contains("point")) fail(f + ".point", f + ".point is required");
    SourceSpec src;
    src.point = get_pair(s.at("point"), f + ".point");
    src.lower = s.contains("lower") ? get_pair(s.at("lower"), f + ".lower") : Vec2(-1.0, -1.0);
    src.upper = s.contains("upper") ? get_pair(s.at("upper"), f + ".upper") : Vec2(1.0, 1.0);
    src.control = s.contains("control") ? get_pair(s.at("control"), f + ".control") : Vec2(0.0, 0.0);
    if (!domain.strictly_contains(src.point)) fail(f + ".point", f + ".point must lie strictly inside the unit square");
    if (!(src.lower.array() < src.upper.array()).all()) fail(f + ".lower", f + ": lower must be < upper componentwise");
    c.sources.push_back(src);
  }
  for (std::size_t a = 0; a < c.sources.size(); ++a)
    for (std::size_t b = a + 1; b < c.sources.size(); ++b)
      if ((c.sources[a].point - c.sources[b].point).norm() == 0.0) {
        fail("sources[" + std::to_string(b) + "].point", "source points must be distinct");
      }

  const json tgt = j.value("target", json::object());
  check_keys(tgt, "target", {"preset", "scale", "control", "field_file"});
  if (tgt.contains("preset")) {
    if (!tgt.at("preset").is_string()) fail("target.preset", "target.preset must be a string");
    c.target.preset = tgt.at("preset").get<std::string>();
  }
  if (c.target.preset != "zero" && c.target.preset != "uniform" && c.target.preset != "vortex" &&
      c.target.preset != "recoverable") {
    fail("target.preset", "target.preset must be one of zero, uniform, vortex, recoverable");
  }
  c.target.scale = get_number(tgt, "scale", "target.scale", c.target.scale);
  if (tgt.contains("control")) {
    const auto& u = tgt.at("control");
    if (!u.is_array()) fail("target.control", "target.control must be an array of pairs");
    for (std::size_t i = 0; i < u.size(); ++i) {
      c.target.control.push_back(get_pair(u[i], "target.control[" + std::to_string(i) + "]"));
    }
  }
  if (c.target.preset == "recoverable" && c.target.control.size() != c.sources.size()) {
    fail("target.control", "target.control needs one pair per source for the recoverable preset");
  }
  if (tgt.contains("field_file")) {
    if (!tgt.at("field_file").is_string()) fail("target.field_file", "target.field_file must be a string");
    c.target.field_file = tgt.at("field_file").get<std::string>();
  }

  if (!j.contains("mode") || !j.at("mode").is_string()) fail("mode", "mode is required and must be a string");
  c.mode = parse_mode(j.at("mode").get<std::string>());

  const json tol = j.value("tolerances", json::object());
  check_keys(tol, "tolerances", {"newton_tol", "newton_max_iters", "opt_tol", "opt_max_iters", "tau", "tol_active",
                                 "kappa_min"});
  c.newton_tol = get_number(tol, "newton_tol", "tolerances.newton_tol", c.newton_tol);
  c.newton_max_iters = get_int(tol, "newton_max_iters", "tolerances.newton_max_iters", c.newton_max_iters);
  c.opt_tol = get_number(tol, "opt_tol", "tolerances.opt_tol", c.opt_tol);
  c.opt_max_iters = get_int(tol, "opt_max_iters", "tolerances.opt_max_iters", c.opt_max_iters);
  c.tau = get_number(tol, "tau", "tolerances.tau", c.tau);
  c.tol_active = get_number(tol, "tol_active", "tolerances.tol_active", c.tol_active);
  c.kappa_min = get_number(tol, "kappa_min", "tolerances.kappa_min", c.kappa_min);
  if (!(c.newton_tol > 0.0)) fail("tolerances.newton_tol", "newton_tol must be positive");
  if (c.newton_max_iters < 1) fail("tolerances.newton_max_iters", "newton_max_iters must be at least 1");
  if (!(c.opt_tol > 0.0)) fail("tolerances.opt_tol", "opt_tol must be positive");
  if (c.opt_max_iters < 0) fail("tolerances.opt_max_iters", "opt_max_iters must be nonnegative");
  if (!(c.tau > 0.0)) fail("tolerances.tau", "tau must be positive");
  if (!(c.tol_active >= 0.0)) fail("tolerances.tol_active", "tol_active must be nonnegative");
  if (!(c.kappa_min > 0.0)) fail("tolerances.kappa_min", "kappa_min must be positive");

  const json chk = j.value("checks", json::object());
  check_keys(chk, "checks", {"samples", "gradient_step", "hessian_step", "growth_sigma", "growth_samples"});
  c.check_samples = get_int(chk, "samples", "checks.samples", c.check_samples);
  c.gradient_step = get_number(chk, "gradient_step", "checks.gradient_step", c.gradient_step);
  c.hessian_step = get_number(chk, "hessian_step", "checks.hessian_step", c.hessian_step);
  c.growth_sigma = get_number(chk, "growth_sigma", "checks.growth_sigma", c.growth_sigma);
  c.growth_samples = get_int(chk, "growth_samples", "checks.growth_samples", c.growth_samples);
  if (c.check_samples < 1) fail("checks.samples", "checks.samples must be at least 1");
  if (!(c.gradient_step > 0.0)) fail("checks.gradient_step", "gradient_step must be positive");
  if (!(c.hessian_step > 0.0)) fail("checks.hessian_step", "hessian_step must be positive");
  if (!(c.growth_sigma > 0.0)) fail("checks.growth_sigma", "growth_sigma must be positive");
  if (c.growth_samples < 1) fail("checks.growth_samples", "growth_samples must be at least 1");

  const json reg = j.value("regularity", json::object());
  check_keys(reg, "regularity", {"ladder", "p"});
  if (reg.contains("ladder")) {
    const auto& l = reg.at("ladder");
    if (!l.is_array() || l.empty()) fail("regularity.ladder", "regularity.ladder must be a nonempty array");
    c.ladder.clear();
    for (const auto& v : l) {
      if (!v.is_number_integer() || v.get<int>() < 2 || v.get<int>() > 512) {
        fail("regularity.ladder", "regularity.ladder entries must be integers in [2,512]");
      }
      c.ladder.push_back(v.get<int>());
    }
  }
  c.lp_exponent = get_number(reg, "p", "regularity.p", c.lp_exponent);
  if (!(c.lp_exponent > 1.0 && c.lp_exponent < 2.0)) fail("regularity.p", "regularity.p must lie in (1,2)");

  const json out = j.value("output", json::object());
  check_keys(out, "output", {"dir", "vtk"});
  if (out.contains("dir")) {
    if (!out.at("dir").is_string() || out.at("dir").get<std::string>().empty()) {
      fail("output.dir", "output.dir must be a nonempty string");
    }
    c.output_dir = out.at("dir").get<std::string>();
  }
  if (out.contains("vtk")) {
    if (!out.at("vtk").is_boolean()) fail("output.vtk", "output.vtk must be a boolean");
    c.vtk = out.at("vtk").get<bool>();
  }

  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) fail("seed", "seed must be a nonnegative integer");
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  return c;
}

json pair_json(const Vec2& v) { return json::array({v.x(), v.y()}); }

json to_json(const ExperimentConfig& c) {
  json j;
  j["mesh"] = {{"n", c.n}, {"grading_levels", c.grading_levels}, {"grading_ratio", c.grading_ratio}};
  j["physics"] = {{"nu", c.nu}, {"eta", c.eta}, {"alpha", c.alpha}};
  j["sources"] = json::array();
  for (const auto& s : c.sources) {
    j["sources"].push_back({{"point", pair_json(s.point)},
                            {"lower", pair_json(s.lower)},
                            {"upper", pair_json(s.upper)},
                            {"control", pair_json(s.control)}});
  }
  json tc = json::array();
  for (const auto& v : c.target.control) tc.push_back(pair_json(v));
  j["target"] = {{"preset", c.target.preset}, {"scale", c.target.scale}, {"control", tc},
                 {"field_file", c.target.field_file}};
  j["mode"] = to_string(c.mode);
  j["tolerances"] = {{"newton_tol", c.newton_tol}, {"newton_max_iters", c.newton_max_iters},
                     {"opt_tol", c.opt_tol},       {"opt_max_iters", c.opt_max_iters},
                     {"tau", c.tau},               {"tol_active", c.tol_active},
                     {"kappa_min", c.kappa_min}};
  j["checks"] = {{"samples", c.check_samples},     {"gradient_step", c.gradient_step},
                 {"hessian_step", c.hessian_step}, {"growth_sigma", c.growth_sigma},
                 {"growth_samples", c.growth_samples}};
  j["regularity"] = {{"ladder", c.ladder}, {"p", c.lp_exponent}};
  j["output"] = {{"dir", c.output_dir}, {"vtk", c.vtk}};
  j["seed"] = c.seed;
  return j;
}

// ---- problem setup -----------------------------------------------------

struct Setup {
  std::shared_ptr<const TaylorHoodSpace> space;
  std::shared_ptr<const NavierStokesModel> model;
  std::unique_ptr<MuckenhouptWeight> weight;
  std::unique_ptr<ReducedProblem> problem;
  std::unique_ptr<BoxConstraints> box;
  ControlVector u0;
};

std::vector<Vec2> source_points(const ExperimentConfig& c) {
  std::vector<Vec2> p;
  for (const auto& s : c.sources) p.push_back(s.point);
  return p;
}

ControlVector flatten(const std::vector<Vec2>& pairs) {
  ControlVector u(2 * static_cast<Eigen::Index>(pairs.size()));
  for (std::size_t t = 0; t < pairs.size(); ++t) {
    u[2 * static_cast<Eigen::Index>(t)] = pairs[t].x();
    u[2 * static_cast<Eigen::Index>(t) + 1] = pairs[t].y();
  }
  return u;
}

StateSolveOptions state_options(const ExperimentConfig& c) {
  StateSolveOptions o;
  o.newton_tol = c.newton_tol;
  o.newton_max_iters = c.newton_max_iters;
  return o;
}

Eigen::VectorXd read_field_file(const TaylorHoodSpace& space, const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("target.field_file", "target.field_file: cannot open " + path);
  std::string line;
  std::getline(in, line);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(space.n_u());
  std::vector<bool> seen(static_cast<std::size_t>(space.n_scalar()), false);
  const double tol = 1e-9;
  std::map<std::pair<long long, long long>, int> index;
  auto key = [](const Vec2& x) {
    return std::pair<long long, long long>(std::llround(x.x() * 1e8), std::llround(x.y() * 1e8));
  };
  for (int s = 0; s < space.n_scalar(); ++s) index[key(space.dof_point(s))] = s;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::stringstream ss(line);
    double vals[4];
    char comma;
    if (!(ss >> vals[0] >> comma >> vals[1] >> comma >> vals[2] >> comma >> vals[3])) {
      fail("target.field_file", "target.field_file: malformed row " + std::to_string(row));
    }
    const Vec2 x(vals[0], vals[1]);
    auto it = index.find(key(x));
    if (it == index.end() || (space.dof_point(it->second) - x).norm() > tol) {
      fail("target.field_file", "target.field_file: row " + std::to_string(row) + " matches no velocity dof");
    }
    v[TaylorHoodSpace::vdof(it->second, 0)] = vals[2];
    v[TaylorHoodSpace::vdof(it->second, 1)] = vals[3];
    seen[static_cast<std::size_t>(it->second)] = true;
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    fail("target.field_file", "target.field_file does not cover every velocity dof of the mesh");
  }
  for (int i : space.boundary_velocity_dofs()) v[i] = 0.0;
  return v;
}

VectorField preset_field(const std::string& preset, double scale) {
  using std::numbers::pi;
  if (preset == "uniform") return [scale](const Vec2&) { return Vec2(scale, 0.0); };
  if (preset == "vortex") {
    return [scale](const Vec2& x) {
      const double sx = std::sin(pi * x.x()), sy = std::sin(pi * x.y());
      return Vec2(scale * sx * sx * std::sin(2 * pi * x.y()), -scale * std::sin(2 * pi * x.x()) * sy * sy);
    };
  }
  return [](const Vec2&) { return Vec2(0.0, 0.0); };
}

std::shared_ptr<const TaylorHoodSpace> build_space(const ExperimentConfig& c, int n) {
  const auto base = build_unit_square_mesh(n);
  const auto pts = source_points(c);
  auto mesh = std::make_shared<const TriMesh>(grade_toward_points(base, pts, c.grading_levels, c.grading_ratio));
  return std::make_shared<const TaylorHoodSpace>(mesh);
}

Setup make_setup(const ExperimentConfig& c, int n) {
  Setup s;
  s.space = build_space(c, n);
  DiracSourceSet sources(source_points(c), s.space->mesh().domain());
  s.weight = std::make_unique<MuckenhouptWeight>(c.alpha, sources);
  auto model = std::make_shared<const NavierStokesModel>(s.space, c.nu, sources);
  s.model = model;

  std::vector<Vec2> lo, hi, u;
  for (const auto& src : c.sources) {
    lo.push_back(src.lower);
    hi.push_back(src.upper);
    u.push_back(src.control);
  }
  s.box = std::make_unique<BoxConstraints>(flatten(lo), flatten(hi));
  s.u0 = flatten(u);

  std::optional<TrackingTarget> target;
  if (!c.target.field_file.empty()) {
    target = TrackingTarget::discrete(read_field_file(*s.space, c.target.field_file));
  } else if (c.target.preset == "recoverable") {
    const auto st = model->solve_state(flatten(c.target.control), state_options(c));
    require_converged(st);
    target = TrackingTarget::discrete(st.field.velocity);
  } else {
    target = TrackingTarget::analytic(preset_field(c.target.preset, c.target.scale));
  }
  s.problem = std::make_unique<ReducedProblem>(model, *target, c.eta, state_options(c));
  return s;
}

// ---- output ------------------------------------------------------------

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string> header) : out_(path) {
    if (!out_) throw InvalidArgument("cannot open " + path.string() + " for writing");
    bool first = true;
    for (const auto& h : header) {
      out_ << (first ? "" : ",") << h;
      first = false;
    }
    out_ << '\n';
  }
  CsvWriter& cell(double v) { return raw(csv_number(v)); }
  CsvWriter& cell(int v) { return raw(std::to_string(v)); }
  CsvWriter& cell(bool v) { return raw(v ? "1" : "0"); }
  CsvWriter& cell(const char* s) { return raw(s); }
  void end() {
    out_ << '\n';
    first_ = true;
  }

 private:
  CsvWriter& raw(const std::string& s) {
    out_ << (first_ ? "" : ",") << s;
    first_ = false;
    return *this;
  }
  std::ofstream out_;
  bool first_ = true;
};

const char* state_name(BoundState s) {
  switch (s) {
    case BoundState::lower: return "lower";
    case BoundState::upper: return "upper";
    case BoundState::inactive: return "inactive";
  }
  return "inactive";
}

const char* cone_name(ConeConstraint c) {
  switch (c) {
    case ConeConstraint::free: return "free";
    case ConeConstraint::zero: return "zero";
    case ConeConstraint::nonnegative: return "nonnegative";
    case ConeConstraint::nonpositive: return "nonpositive";
  }
  return "free";
}

struct Context {
  const ExperimentConfig& cfg;
  std::filesystem::path dir;
  std::ostream* log;
  RunOutcome outcome;

  std::filesystem::path file(const std::string& name) {
    outcome.files.push_back(name);
    return dir / name;
  }
  void say(const std::string& s) const {
    if (log) *log << s << '\n';
  }
};

ControlVector random_feasible(const BoxConstraints& box, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  ControlVector u(box.dim());
  for (int i = 0; i < box.dim(); ++i) u[i] = box.lower()[i] + unif(rng) * (box.upper()[i] - box.lower()[i]);
  return u;
}

void write_state_field(Context& ctx, const FlowField& f, const std::string& name) {
  CsvWriter w(ctx.file(name), {"x", "y", "ux", "uy"});
  const auto& space = *f.space;
  for (int s = 0; s < space.n_scalar(); ++s) {
    const Vec2 x = space.dof_point(s);
    w.cell(x.x()).cell(x.y()).cell(f.velocity[TaylorHoodSpace::vdof(s, 0)]).cell(f.velocity[TaylorHoodSpace::vdof(s, 1)]);
    w.end();
  }
}

void write_kkt(Context& ctx, const ControlVector& u, const GradientVector& psi, const BoxConstraints& box) {
  const auto rep = kkt_sign_report(u, psi, box, ctx.cfg.tol_active);
  CsvWriter w(ctx.file("kkt.csv"), {"source", "component", "u", "psi", "lower", "upper", "state", "violated"});
  for (int i = 0; i < u.size(); ++i) {
    w.cell(i / 2).cell(i % 2).cell(u[i]).cell(psi[i]).cell(box.lower()[i]).cell(box.upper()[i]);
    w.cell(state_name(rep.state[static_cast<std::size_t>(i)])).cell(static_cast<bool>(rep.violated[static_cast<std::size_t>(i)]));
    w.end();
  }
}

void run_solve(Context& ctx) {
  const auto s = make_setup(ctx.cfg, ctx.cfg.n);
  const auto ev = s.problem->evaluate(s.u0, true);
  const auto& y = ev.state.field.velocity;
  const double reg = 0.5 * ctx.cfg.eta * s.u0.squaredNorm();
  CsvWriter w(ctx.file("solve.csv"),
              {"nodes", "triangles", "velocity_dofs", "h_min", "converged", "newton_residual", "newton_iterations",
               "cost", "tracking", "regularization", "grad_l2", "grad_weighted", "lp_seminorm",
               "regularity_indicator"});
  w.cell(s.space->mesh().num_nodes()).cell(s.space->mesh().num_triangles()).cell(s.space->n_u());
  w.cell(s.space->mesh().min_diameter()).cell(ev.state.converged).cell(ev.state.final_residual());
  w.cell(static_cast<int>(ev.state.residual_history.size()) - 1).cell(ev.cost).cell(ev.cost - reg).cell(reg);
  w.cell(h1_seminorm(*s.space, y)).cell(weighted_seminorm(*s.space, y, *s.weight, 1));
  w.cell(lp_seminorm(*s.space, y, ctx.cfg.lp_exponent)).cell(regularity_indicator(ev.state));
  w.end();

  CsvWriter p(ctx.file("sources.csv"), {"source", "x", "y", "u_x", "u_y", "z_x", "z_y", "psi_x", "psi_y"});
  for (int t = 0; t < s.model->sources().size(); ++t) {
    const Vec2 x = s.model->sources().points()[static_cast<std::size_t>(t)];
    const Vec2 z = ev.adjoint->point_values[static_cast<std::size_t>(t)];
    p.cell(t).cell(x.x()).cell(x.y()).cell(s.u0[2 * t]).cell(s.u0[2 * t + 1]).cell(z.x()).cell(z.y());
    p.cell(ev.gradient[2 * t]).cell(ev.gradient[2 * t + 1]);
    p.end();
  }
  write_state_field(ctx, ev.state.field, "state_field.csv");
  if (ctx.cfg.vtk) {
    write_vtk_field(ctx.file("state.vtk"), ev.state.field, "velocity");
    write_vtk_field(ctx.file("adjoint.vtk"), ev.adjoint->field, "adjoint_velocity");
  }
  ctx.say("solve: cost " + csv_number(ev.cost));
}

OptimizeReport optimize(Context& ctx, const Setup& s) {
  OptimizeOptions o;
  o.tol = ctx.cfg.opt_tol;
  o.max_iters = ctx.cfg.opt_max_iters;
  const auto rep = projected_gradient(*s.problem, project_box(s.u0, *s.box), *s.box, o);
  std::initializer_list<std::string> cols = {"iteration", "cost", "vi_residual", "step"};
  std::vector<std::string> header(cols);
  for (int i = 0; i < s.box->dim(); ++i) header.push_back("u" + std::to_string(i / 2) + (i % 2 ? "_y" : "_x"));
  {
    std::ofstream out(ctx.file("optimize.csv"));
    for (std::size_t h = 0; h < header.size(); ++h) out << (h ? "," : "") << header[h];
    out << '\n';
    for (std::size_t k = 0; k < rep.iterates.size(); ++k) {
      const auto& it = rep.iterates[k];
      out << k << ',' << csv_number(it.cost) << ',' << csv_number(it.vi_residual) << ',' << csv_number(it.step);
      for (int i = 0; i < it.u.size(); ++i) out << ',' << csv_number(it.u[i]);
      out << '\n';
    }
  }
  write_kkt(ctx, rep.u, rep.gradient, *s.box);
  ctx.say("optimize: " + rep.message + " after " + std::to_string(rep.iterations) + " iterations, vi_residual " +
          csv_number(rep.vi_residual));
  return rep;
}

void run_optimize(Context& ctx) {
  const auto s = make_setup(ctx.cfg, ctx.cfg.n);
  const auto rep = optimize(ctx, s);
  if (ctx.cfg.vtk) {
    const auto st = s.model->solve_state(rep.u, state_options(ctx.cfg));
    write_vtk_field(ctx.file("state.vtk"), st.field, "velocity");
  }
}

void run_gradient_check(Context& ctx) {
  const auto s = make_setup(ctx.cfg, ctx.cfg.n);
  std::mt19937_64 rng(ctx.cfg.seed);
  const double h = ctx.cfg.gradient_step;
  CsvWriter w(ctx.file("gradient_check.csv"),
              {"sample", "component", "adjoint", "finite_difference", "abs_error", "rel_error"});
  double worst = 0.0;
  for (int k = 0; k < ctx.cfg.check_samples; ++k) {
    const ControlVector u = random_feasible(*s.box, rng);
    const GradientVector g = s.problem->reduced_gradient(u);
    Eigen::VectorXd fd(g.size());
    for (int i = 0; i < g.size(); ++i) {
      const ControlVector e = ControlVector::Unit(g.size(), i);
      fd[i] = (s.problem->reduced_cost(u + h * e) - s.problem->reduced_cost(u - h * e)) / (2.0 * h);
    }
    const double floor = 1e-3 * fd.cwiseAbs().maxCoeff();
    for (int i = 0; i < g.size(); ++i) {
      const double err = std::abs(g[i] - fd[i]);
      const double rel = err / std::max({std::abs(fd[i]), floor, 1e-300});
      worst = std::max(worst, rel);
      w.cell(k).cell(i).cell(g[i]).cell(fd[i]).cell(err).cell(rel);
      w.end();
    }
  }
  ctx.say("gradient-check: worst relative error " + csv_number(worst));
}

void run_hessian_check(Context& ctx) {
  const auto s = make_setup(ctx.cfg, ctx.cfg.n);
  std::mt19937_64 rng(ctx.cfg.seed);
  std::normal_distribution<double> normal;
  const double h = ctx.cfg.hessian_step;
  CsvWriter w(ctx.file("hessian_check.csv"),
              {"sample", "quadratic_form", "finite_difference", "rel_error", "matrix_form", "form_matrix_rel_diff",
               "symmetry_error", "tensor_form"});
  for (int k = 0; k < ctx.cfg.check_samples; ++k) {
    const ControlVector u = random_feasible(*s.box, rng);
    ControlVector v(u.size());
    for (int i = 0; i < v.size(); ++i) v[i] = normal(rng);
    v.normalize();
    const auto ev = s.problem->evaluate(u, true);
    const double form = s.problem->hessian_quadratic_form(ev, v);
    const Eigen::MatrixXd H = s.problem->assemble_reduced_hessian(ev);
    const double matrix = v.dot(H * v);
    const double fd = (s.problem->reduced_cost(u + h * v) - 2.0 * ev.cost + s.problem->reduced_cost(u - h * v)) / (h * h);
    w.cell(k).cell(form).cell(fd).cell(std::abs(form - fd) / std::abs(fd)).cell(matrix);
    w.cell(std::abs(form - matrix) / std::abs(form)).cell((H - H.transpose()).norm() / H.norm());
    w.cell(s.problem->hessian_tensor_form(ev, v));
    w.end();
  }
}

void run_ssc(Context& ctx) {
  const auto s = make_setup(ctx.cfg, ctx.cfg.n);
  const auto opt = optimize(ctx, s);
  if (!opt.converged) throw NonConvergence("ssc: optimizer did not reach stationarity (" + opt.message + ")");
  SscOptions so;
  so.tau = ctx.cfg.tau;
  so.tol_active = ctx.cfg.tol_active;
  so.kappa_min = ctx.cfg.kappa_min;
  so.stationarity_tol = ctx.cfg.opt_tol;
  const auto r = check_ssc(*s.problem, opt.u, *s.box, so);
  GrowthReport g;
  if (r.ssc_holds) {
    g = quadratic_growth_probe(*s.problem, opt.u, *s.box, ctx.cfg.growth_sigma, ctx.cfg.growth_samples, ctx.cfg.seed);
  }
  auto count = [](const CriticalCone& c, ConeConstraint k) {
    return static_cast<int>(std::count(c.constraint.begin(), c.constraint.end(), k));
  };
  CsvWriter w(ctx.file("ssc.csv"),
              {"vi_residual", "ssc_holds", "kappa", "necessary_min", "necessary_holds", "tau", "free",
               "sign_restricted", "fixed_zero", "growth_mu", "growth_samples", "growth_violations"});
  w.cell(r.vi_residual).cell(r.ssc_holds).cell(r.kappa).cell(r.necessary_min).cell(r.necessary_holds).cell(r.tau);
  w.cell(count(r.tau_cone, ConeConstraint::free));
  w.cell(count(r.tau_cone, ConeConstraint::nonnegative) + count(r.tau_cone, ConeConstraint::nonpositive));
  w.cell(count(r.tau_cone, ConeConstraint::zero)).cell(g.mu).cell(g.samples).cell(g.violations);
  w.end();

  CsvWriter c(ctx.file("cone.csv"), {"component", "u", "psi", "bound_state", "cone", "tau_cone"});
  for (int i = 0; i < opt.u.size(); ++i) {
    const auto si = static_cast<std::size_t>(i);
    c.cell(i).cell(opt.u[i]).cell(r.gradient[i]).cell(state_name(r.bound_state[si]));
    c.cell(cone_name(r.cone.constraint[si])).cell(cone_name(r.tau_cone.constraint[si]));
    c.end();
  }
  std::ofstream hm(ctx.file("hessian.csv"));
  for (int i = 0; i < r.hessian.rows(); ++i) {
    for (int j = 0; j < r.hessian.cols(); ++j) hm << (j ? "," : "") << csv_number(r.hessian(i, j));
    hm << '\n';
  }
  ctx.say(std::string("ssc: ") + (r.ssc_holds ? "holds" : "fails") + ", kappa " + csv_number(r.kappa));
}

void run_regularity(Context& ctx) {
  const auto rows = regularity_study(ctx.cfg);
  CsvWriter w(ctx.file("regularity.csv"), {"n", "nodes", "h_min", "converged", "newton_residual", "grad_l2",
                                           "grad_weighted", "lp_seminorm", "regularity_indicator"});
  for (const auto& r : rows) {
    w.cell(r.n).cell(r.nodes).cell(r.h_min).cell(r.converged).cell(r.newton_residual).cell(r.grad_l2);
    w.cell(r.grad_weighted).cell(r.lp_seminorm).cell(r.regularity_indicator);
    w.end();
    ctx.say("regularity-study: n=" + std::to_string(r.n) + " grad_l2 " + csv_number(r.grad_l2));
  }
}

void write_manifest(const ExperimentConfig& cfg, const std::filesystem::path& dir, const RunOutcome& outcome,
                    const std::string& status, const std::string& error) {
  json m;
  m["config"] = to_json(cfg);
  m["config_hash"] = content_hash(cfg.canonical_json());
  m["mode"] = to_string(cfg.mode);
  auto files = outcome.files;
  std::sort(files.begin(), files.end());
  m["outputs"] = files;
  m["status"] = status;
  if (!error.empty()) m["error"] = error;
  m["version"] = "0.1.0";
  std::ofstream out(dir / "manifest.json");
  out << m.dump(2) << '\n';
}

}  // namespace

const char* to_string(RunMode m) {
  switch (m) {
    case RunMode::solve: return "solve";
    case RunMode::optimize: return "optimize";
    case RunMode::gradient_check: return "gradient-check";
    case RunMode::hessian_check: return "hessian-check";
    case RunMode::ssc: return "ssc";
    case RunMode::regularity_study: return "regularity-study";
  }
  return "solve";
}

std::string ExperimentConfig::canonical_json() const { return to_json(*this).dump(); }

ExperimentConfig parse_config(std::string_view json_text, const ConfigOverrides& overrides) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("", "config must be a JSON object");
  if (overrides.output_dir) j["output"]["dir"] = *overrides.output_dir;
  if (overrides.seed) j["seed"] = *overrides.seed;
  return from_json(j);
}

ExperimentConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

std::string content_hash(std::string_view content) {
  const std::string header = "blob " + std::to_string(content.size()) + '\0';
  std::string data = header;
  data.append(content);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha1(), nullptr) != 1) {
    throw InternalError("sha1 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

std::vector<RegularityRow> regularity_study(const ExperimentConfig& cfg) {
  std::vector<RegularityRow> rows;
  for (int n : cfg.ladder) {
    const auto s = make_setup(cfg, n);
    const auto st = s.model->solve_state(s.u0, state_options(cfg));
    require_converged(st);
    RegularityRow r;
    r.n = n;
    r.nodes = s.space->mesh().num_nodes();
    r.h_min = s.space->mesh().min_diameter();
    r.converged = st.converged;
    r.newton_residual = st.final_residual();
    r.grad_l2 = h1_seminorm(*s.space, st.field.velocity);
    r.grad_weighted = weighted_seminorm(*s.space, st.field.velocity, *s.weight, 1);
    r.lp_seminorm = lp_seminorm(*s.space, st.field.velocity, cfg.lp_exponent);
    r.regularity_indicator = regularity_indicator(st);
    rows.push_back(r);
  }
  return rows;
}

RunOutcome run_experiment(const ExperimentConfig& cfg, std::ostream* log) {
  const std::filesystem::path dir(cfg.output_dir);
  std::filesystem::create_directories(dir);
  Context ctx{cfg, dir, log, {}};
  try {
    switch (cfg.mode) {
      case RunMode::solve: run_solve(ctx); break;
      case RunMode::optimize: run_optimize(ctx); break;
      case RunMode::gradient_check: run_gradient_check(ctx); break;
      case RunMode::hessian_check: run_hessian_check(ctx); break;
      case RunMode::ssc: run_ssc(ctx); break;
      case RunMode::regularity_study: run_regularity(ctx); break;
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    write_manifest(cfg, dir, ctx.outcome, "failed", e.what());
    throw;
  }
  write_manifest(cfg, dir, ctx.outcome, "ok", "");
  return ctx.outcome;
}

}  // namespace pointflow
