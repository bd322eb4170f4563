#include "semiweyl/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include <Eigen/Core>
#include <boost/version.hpp>

#include "semiweyl/experiments.hpp"
#include "semiweyl/hsfunc.hpp"
#include "semiweyl/moyal.hpp"
#include "semiweyl/symbolfam.hpp"

namespace semiweyl::cli {

namespace {

const char* const kNames[] = {"trace_formula", "weyl_law", "funcalc_check", "moyal_check", "extension_check",
                              "class_check"};

const char* const kPresets[] = {"free_torus_1d", "free_torus_2d", "half_cos", "two_cos", "custom"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, const std::string& seps) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (seps.find(ch) != std::string::npos) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

struct Ctx {
  int line;
  std::string key;
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("line " + std::to_string(line) + ": key '" + key + "': " + msg);
  }
};

double to_double(const Ctx& ctx, const std::string& s) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v))
    ctx.fail("malformed number '" + s + "'");
  return v;
}

long long to_int(const Ctx& ctx, const std::string& s) {
  long long v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) ctx.fail("malformed integer '" + s + "'");
  return v;
}

std::uint64_t to_u64(const Ctx& ctx, const std::string& s) {
  std::uint64_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) ctx.fail("malformed unsigned integer '" + s + "'");
  return v;
}

BumpSpec to_bump(const Ctx& ctx, const std::string& s) {
  if (s == "none") return {};
  auto parts = split(s, " \t,");
  if (parts.size() != 2) ctx.fail("expected 'none' or two numbers 'lo hi'");
  BumpSpec b{true, to_double(ctx, parts[0]), to_double(ctx, parts[1])};
  if (!(b.hi > b.lo)) ctx.fail("bump support needs lo < hi");
  return b;
}

using Setter = std::function<void(ExperimentConfig&, const Ctx&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    t["experiment"] = [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
      auto e = experiment_from_name(v);
      if (!e) x.fail("unknown experiment '" + v + "'");
      c.experiment = *e;
    };
    t["potential"] = [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
      if (std::find(std::begin(kPresets), std::end(kPresets), v) == std::end(kPresets))
        x.fail("unknown potential '" + v + "'");
      c.potential = v;
    };
    t["dimension"] = [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
      c.dimension = int(to_int(x, v));
      if (c.dimension != 1 && c.dimension != 2) x.fail("must be 1 or 2");
    };
    t["coefficient"] = [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
      auto p = split(v, " \t");
      if (p.size() != 4) x.fail("expected 'k1 k2 re im'");
      const schrodinger::Mode k{int(to_int(x, p[0])), int(to_int(x, p[1]))};
      if (c.coefficients.count(k)) x.fail("duplicate coefficient for mode (" + p[0] + ", " + p[1] + ")");
      c.coefficients[k] = cplx(to_double(x, p[2]), to_double(x, p[3]));
    };
    t["E"] = [](ExperimentConfig& c, const Ctx& x, const std::string& v) { c.E = to_double(x, v); };
    t["delta"] = [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
      c.delta = to_double(x, v);
      if (!(c.delta >= 0.0 && c.delta < 0.5)) x.fail("delta must be in [0, 1/2)");
    };
    t["c"] = [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
      c.c = to_double(x, v);
      if (!(c.c > 0.0)) x.fail("must be positive");
    };
    t["window_base"] = [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
      if (v != "standard" && v != "plateau") x.fail("must be 'standard' or 'plateau'");
      c.window_base = v;
    };
    t["h_max"] = [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
      c.h_max = to_double(x, v);
      if (!(c.h_max > 0.0 && c.h_max <= 1.0)) x.fail("must be in (0, 1]");
    };
    t["h_min"] = [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
      c.h_min = to_double(x, v);
      if (!(c.h_min > 0.0 && c.h_min <= 1.0)) x.fail("must be in (0, 1]");
    };
    t["h_count"] = [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
      c.h_count = int(to_int(x, v));
      if (c.h_count < 6) x.fail("must be at least 6");
    };
    t["h_values"] = [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
      c.h_values.clear();
      for (auto& s : split(v, " \t,")) {
        const double h = to_double(x, s);
        if (!(h > 0.0 && h <= 1.0)) x.fail("every h must be in (0, 1]");
        c.h_values.push_back(h);
      }
      if (c.h_values.empty()) x.fail("empty list");
    };
    t["localizer_x"] = [](ExperimentConfig& c, const Ctx& x, const std::string& v) { c.localizer_x = to_bump(x, v); };
    t["localizer_xi"] = [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
      c.localizer_xi = to_bump(x, v);
    };
    t["order"] = [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
      c.order = int(to_int(x, v));
      if (c.order < 1) x.fail("must be at least 1");
    };
    t["quad_x"] = [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
      c.quad_x = int(to_int(x, v));
      if (c.quad_x < 1) x.fail("must be at least 1");
    };
    t["quad_y"] = [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
      c.quad_y = int(to_int(x, v));
      if (c.quad_y < 1) x.fail("must be at least 1");
    };
    t["grading"] = [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
      c.grading = to_double(x, v);
      if (!(c.grading >= 1.0)) x.fail("must be >= 1");
    };
    t["eps_y"] = [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
      c.eps_y = to_double(x, v);
      if (!(c.eps_y >= 0.0)) x.fail("must be nonnegative");
    };
    t["operator"] = [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
      if (v != "torus" && v != "diag123") x.fail("must be 'torus' or 'diag123'");
      c.op = v;
    };
    t["modes"] = [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
      c.modes = int(to_int(x, v));
      if (c.modes < 0) x.fail("must be nonnegative");
    };
    t["containment_margin"] = [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
      c.containment_margin = to_double(x, v);
      if (!(c.containment_margin >= 0.0)) x.fail("must be nonnegative");
    };
    t["grid_points"] = [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
      c.grid_points = int(to_int(x, v));
      if (c.grid_points < 16 || c.grid_points % 2 != 0) x.fail("must be even and at least 16");
    };
    t["half_width"] = [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
      c.half_width = to_double(x, v);
      if (!(c.half_width > 0.0)) x.fail("must be positive");
    };
    t["moyal_orders"] = [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
      c.moyal_orders.clear();
      for (auto& s : split(v, " \t,")) {
        const int k = int(to_int(x, s));
        if (k < 0 || k > 3) x.fail("orders must be in [0, 3]");
        c.moyal_orders.push_back(k);
      }
      if (c.moyal_orders.empty()) x.fail("empty list");
    };
    t["shell_lo_exp"] = [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
      c.shell_lo_exp = int(to_int(x, v));
      if (c.shell_lo_exp < 0 || c.shell_lo_exp > 40) x.fail("must be in [0, 40]");
    };
    t["shell_hi_exp"] = [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
      c.shell_hi_exp = int(to_int(x, v));
      if (c.shell_hi_exp < 0 || c.shell_hi_exp > 40) x.fail("must be in [0, 40]");
    };
    t["j_max"] = [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
      c.j_max = int(to_int(x, v));
      if (c.j_max < 1 || c.j_max > 8) x.fail("must be in [1, 8]");
    };
    t["samples"] = [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
      c.samples = to_u64(x, v);
      if (c.samples < 1) x.fail("must be positive");
    };
    t["seed"] = [](ExperimentConfig& c, const Ctx& x, const std::string& v) { c.seed = to_u64(x, v); };
    t["threads"] = [](ExperimentConfig& c, const Ctx& x, const std::string& v) {
      c.threads = int(to_int(x, v));
      if (c.threads < 1) x.fail("must be at least 1");
    };
    return t;
  }();
  return table;
}

symbolfam::BumpFunction window_base(const ExperimentConfig& cfg) {
  if (cfg.window_base == "plateau") return symbolfam::BumpFunction::plateau(-1.0, -0.5, 0.5, 1.0);
  return symbolfam::BumpFunction::standard();
}

symbolfam::CutoffFamily window_family(const ExperimentConfig& cfg) {
  return symbolfam::make_window_family(window_base(cfg), cfg.E, cfg.delta, cfg.c);
}

experiments::LocalizerSpec localizer(const ExperimentConfig& cfg) {
  experiments::LocalizerSpec b;
  if (cfg.localizer_x.present) b.b_x = symbolfam::BumpFunction::standard(cfg.localizer_x.lo, cfg.localizer_x.hi);
  if (cfg.localizer_xi.present)
    b.b_xi = symbolfam::BumpFunction::standard(cfg.localizer_xi.lo, cfg.localizer_xi.hi);
  b.delta_b = 0.0;
  return b;
}

std::string fmt_int(long long v) { return std::to_string(v); }

std::string bump_text(const BumpSpec& b) {
  return b.present ? format_number(b.lo) + " " + format_number(b.hi) : "none";
}

CsvTable trace_formula(const ExperimentConfig& cfg, std::ostream& log) {
  if (!cfg.h_values.empty()) throw ConfigError("trace_formula uses the geometric grid h_max, h_min, h_count");
  const auto V = make_potential(cfg);
  const auto grid = experiments::HGrid::between(cfg.h_max, cfg.h_min, cfg.h_count);
  auto res = experiments::run_trace_formula_experiment(V, window_family(cfg), localizer(cfg), grid,
                                                       {cfg.containment_margin, cfg.threads});
  CsvTable t{"h,lhs,rhs,remainder,supp_volume,slope_running", {}};
  for (auto& r : res.rows)
    t.rows.push_back({format_number(r.h), format_number(r.lhs), format_number(r.rhs), format_number(r.remainder),
                      format_number(r.supp_volume), format_number(r.slope_running)});
  if (res.fit)
    log << "remainder slope " << format_number(res.fit->slope) << " r_squared " << format_number(res.fit->r_squared)
        << " predicted " << format_number(1.0 - 2.0 * cfg.delta) << "\n";
  else
    log << "remainder at floor (" << experiments::kRemainderFloor << ")\n";
  return t;
}

CsvTable weyl_law(const ExperimentConfig& cfg, std::ostream& log) {
  const auto V = make_potential(cfg);
  experiments::WeylOptions opts;
  opts.containment_margin = cfg.containment_margin;
  opts.threads = cfg.threads;
  opts.liouville = {cfg.seed, std::size_t(cfg.samples)};
  auto rows = experiments::run_weyl_count_experiment(V, cfg.E, cfg.delta, h_list(cfg), opts);
  CsvTable t{"h,count,scaled,liouville,deviation", {}};
  int ties = 0;
  for (auto& r : rows) {
    t.rows.push_back({format_number(r.h), fmt_int(r.count), format_number(r.scaled), format_number(r.liouville),
                      format_number(r.deviation)});
    ties += r.endpoint_tie;
  }
  log << "eventually decreasing " << (experiments::eventually_decreasing(rows) ? "yes" : "no") << "\n";
  if (ties) log << "window endpoint ties at " << ties << " h values (half-open policy applied)\n";
  return t;
}

CsvTable funcalc_check(const ExperimentConfig& cfg, std::ostream& log) {
  const auto fam = window_family(cfg);
  CsvTable t{"h,dim,frobenius_rel_err,quad_nodes,extension_order", {}};
  for (double h : h_list(cfg)) {
    const Interval supp = fam.support(h);
    weylquant::OperatorMatrix P;
    schrodinger::SpectralDecomposition dec;
    if (cfg.op == "diag123") {
      CMatrix d = CMatrix::Zero(3, 3);
      for (int i = 0; i < 3; ++i) d(i, i) = i + 1;
      P = {d, weylquant::Basis::fourier_modes, h, true};
      dec = schrodinger::eigensolve(d, h);
    } else {
      const auto V = make_potential(cfg);
      const int K = cfg.modes > 0 ? cfg.modes : schrodinger::K_rule(h, supp.hi, V, cfg.containment_margin);
      const auto op = schrodinger::assemble_torus_operator(
          V, h, K, schrodinger::ContainmentCheck{supp.hi, cfg.containment_margin});
      P = op.as_operator();
      dec = schrodinger::eigensolve(op);
    }
    const auto f = hsfunc::SampledFunction::sample([&](double x) { return fam.value(x, h); }, supp.lo, supp.hi, 2001);
    const auto ext = hsfunc::build_extension(f, cfg.order);
    const auto quad = hsfunc::ComplexQuadrature::covering(ext, cfg.quad_x, cfg.quad_y, cfg.grading);
    const auto A = hsfunc::hs_funcalc(P, ext, quad, {cfg.eps_y, cfg.threads});
    const auto oracle = schrodinger::spectral_funcalc(dec, fam, h);
    const double denom = oracle.entries.norm();
    const double err = (A.entries - oracle.entries).norm() / (denom > 0.0 ? denom : 1.0);
    t.rows.push_back({format_number(h), fmt_int(P.size()), format_number(err), fmt_int((long long)quad.node_count()),
                      fmt_int(cfg.order)});
    log << "h " << format_number(h) << " relative Frobenius error " << format_number(err) << "\n";
  }
  return t;
}

CsvTable moyal_check(const ExperimentConfig& cfg, std::ostream& log) {
  const auto grid = weylquant::GridSpec::make(cfg.half_width, cfg.grid_points);
  const weylquant::SymbolFn s1 = [](double y, double eta) {
    return cplx(std::exp(-0.5 * (y - 0.3) * (y - 0.3) - 0.5 * eta * eta));
  };
  const weylquant::SymbolFn s2 = [](double y, double eta) {
    return cplx(std::exp(-0.5 * y * y - 0.5 * (eta - 0.4) * (eta - 0.4)));
  };
  const auto hs = h_list(cfg);
  auto fits = moyal::verify_composition(s1, s2, cfg.moyal_orders, hs, grid);
  CsvTable t{"h,K,residual_norm", {}};
  for (auto& f : fits) {
    for (std::size_t i = 0; i < f.h.size(); ++i)
      t.rows.push_back({format_number(f.h[i]), fmt_int(f.K), format_number(f.residual[i])});
    if (f.fitted)
      log << "K " << f.K << " residual slope " << format_number(f.slope) << " predicted " << f.K + 1 << "\n";
    else
      log << "K " << f.K << " residual at floor\n";
  }
  return t;
}

CsvTable extension_check(const ExperimentConfig& cfg, std::ostream& log) {
  const double lo = cfg.E - cfg.c, hi = cfg.E + cfg.c;
  const auto f = hsfunc::SampledFunction::sample(
      [&](double x) {
        const double t = (x - cfg.E) / cfg.c;
        return std::abs(t) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - t * t)) : 0.0;
      },
      lo, hi, 2001);
  const auto ext = hsfunc::build_extension(f, cfg.order);
  if (cfg.shell_hi_exp < cfg.shell_lo_exp) throw ConfigError("shell_hi_exp must be >= shell_lo_exp");
  const auto prof = hsfunc::dbar_bound_profile(ext, hsfunc::dyadic_shells(cfg.shell_lo_exp, cfg.shell_hi_exp));
  CsvTable t{"shell_y,sup_dbar", {}};
  std::vector<double> ys, sups;
  for (auto& s : prof) {
    t.rows.push_back({format_number(s.y), format_number(s.sup_dbar)});
    ys.push_back(s.y);
    sups.push_back(s.sup_dbar);
  }
  try {
    const auto fit = fit_loglog(ys, sups);
    log << "dbar shell slope " << format_number(fit.slope) << " target order " << cfg.order << "\n";
  } catch (const FitError&) {
    log << "dbar profile has fewer than 3 positive shells\n";
  }
  return t;
}

CsvTable class_check(const ExperimentConfig& cfg, std::ostream& log) {
  const auto hs = h_list(cfg);
  const auto ex = symbolfam::estimate_class_exponents(window_family(cfg), cfg.j_max, hs);
  CsvTable t{"j,fitted_exponent,predicted_exponent", {}};
  for (auto& e : ex) {
    t.rows.push_back({fmt_int(e.j), format_number(e.fitted_exponent), format_number(e.predicted_exponent)});
    log << "j " << e.j << " fitted " << format_number(e.fitted_exponent) << " predicted "
        << format_number(e.predicted_exponent) << "\n";
  }
  return t;
}

}  // namespace

const char* experiment_name(Experiment e) { return kNames[int(e)]; }

std::optional<Experiment> experiment_from_name(const std::string& name) {
  for (int i = 0; i < 6; ++i)
    if (name == kNames[i]) return Experiment(i);
  return std::nullopt;
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  bool have_experiment = false;
  std::map<std::string, int> seen;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line) + ": expected 'key = value', got '" + body + "'");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    const Ctx ctx{line, key};
    auto it = setters().find(key);
    if (it == setters().end()) ctx.fail("unknown key");
    if (key != "coefficient" && seen.count(key))
      ctx.fail("repeated key (first set on line " + std::to_string(seen[key]) + ")");
    seen[key] = line;
    if (value.empty()) ctx.fail("missing value");
    it->second(cfg, ctx, value);
    if (key == "experiment") have_experiment = true;
  }
  if (!have_experiment) throw ConfigError("key 'experiment': required");

  auto at = [&](const std::string& key) { return Ctx{seen.count(key) ? seen[key] : 0, key}; };
  if (cfg.potential != "custom") {
    if (!cfg.coefficients.empty()) at("coefficient").fail("coefficients need potential = custom");
    if (seen.count("dimension")) at("dimension").fail("dimension is set by the preset; use potential = custom");
  }
  if (cfg.h_min >= cfg.h_max && cfg.h_values.empty()) at("h_min").fail("h_min must be below h_max");
  if (cfg.shell_hi_exp < cfg.shell_lo_exp) at("shell_hi_exp").fail("must be >= shell_lo_exp");
  if (cfg.experiment == Experiment::weyl_law && cfg.delta >= 1.0 / 3.0)
    at("delta").fail("the shrinking-window Weyl law needs delta < 1/3");
  try {
    make_potential(cfg);
  } catch (const DomainError& e) {
    at(seen.count("coefficient") ? "coefficient" : "potential").fail(e.what());
  }
  return cfg;
}

std::string echo_config(const ExperimentConfig& c) {
  std::ostringstream o;
  auto kv = [&](const std::string& k, const std::string& v) { o << k << " = " << v << "\n"; };
  auto list_d = [](const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_number(v[i]);
    return s;
  };
  kv("experiment", experiment_name(c.experiment));
  kv("potential", c.potential);
  if (c.potential == "custom") {
    kv("dimension", std::to_string(c.dimension));
    for (auto& [k, v] : c.coefficients)
      kv("coefficient", std::to_string(k[0]) + " " + std::to_string(k[1]) + " " + format_number(v.real()) + " " +
                            format_number(v.imag()));
  }
  kv("E", format_number(c.E));
  kv("delta", format_number(c.delta));
  kv("c", format_number(c.c));
  kv("window_base", c.window_base);
  kv("h_max", format_number(c.h_max));
  kv("h_min", format_number(c.h_min));
  kv("h_count", std::to_string(c.h_count));
  if (!c.h_values.empty()) kv("h_values", list_d(c.h_values));
  kv("localizer_x", bump_text(c.localizer_x));
  kv("localizer_xi", bump_text(c.localizer_xi));
  kv("order", std::to_string(c.order));
  kv("quad_x", std::to_string(c.quad_x));
  kv("quad_y", std::to_string(c.quad_y));
  kv("grading", format_number(c.grading));
  kv("eps_y", format_number(c.eps_y));
  kv("operator", c.op);
  kv("modes", std::to_string(c.modes));
  kv("containment_margin", format_number(c.containment_margin));
  kv("grid_points", std::to_string(c.grid_points));
  kv("half_width", format_number(c.half_width));
  std::string orders;
  for (std::size_t i = 0; i < c.moyal_orders.size(); ++i) orders += (i ? ", " : "") + std::to_string(c.moyal_orders[i]);
  kv("moyal_orders", orders);
  kv("shell_lo_exp", std::to_string(c.shell_lo_exp));
  kv("shell_hi_exp", std::to_string(c.shell_hi_exp));
  kv("j_max", std::to_string(c.j_max));
  kv("samples", std::to_string(c.samples));
  kv("seed", std::to_string(c.seed));
  kv("threads", std::to_string(c.threads));
  return o.str();
}

schrodinger::TorusPotential make_potential(const ExperimentConfig& cfg) {
  if (cfg.potential == "free_torus_1d") return schrodinger::TorusPotential::zero(1);
  if (cfg.potential == "free_torus_2d") return schrodinger::TorusPotential::zero(2);
  if (cfg.potential == "half_cos") return schrodinger::TorusPotential::cosine(0.5);
  if (cfg.potential == "two_cos") return schrodinger::TorusPotential::cosine(2.0);
  return schrodinger::TorusPotential(cfg.dimension, cfg.coefficients);
}

std::vector<double> h_list(const ExperimentConfig& cfg) {
  if (!cfg.h_values.empty()) return cfg.h_values;
  return experiments::HGrid::between(cfg.h_max, cfg.h_min, cfg.h_count).values();
}

std::string CsvTable::str() const {
  std::string s = header + "\n";
  for (auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + row[i];
    s += "\n";
  }
  return s;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvTable run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
  switch (cfg.experiment) {
    case Experiment::trace_formula: return trace_formula(cfg, log);
    case Experiment::weyl_law: return weyl_law(cfg, log);
    case Experiment::funcalc_check: return funcalc_check(cfg, log);
    case Experiment::moyal_check: return moyal_check(cfg, log);
    case Experiment::extension_check: return extension_check(cfg, log);
    case Experiment::class_check: return class_check(cfg, log);
  }
  throw ConfigError("unknown experiment");
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config:
    case ErrorKind::domain:
    case ErrorKind::capability: return 2;
    case ErrorKind::numerical:
    case ErrorKind::fit: return 3;
    case ErrorKind::resolution:
    case ErrorKind::support: return 4;
  }
  return 3;
}

std::string version_string() {
  return "semiweyl 0.1.0 (eigen " + std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
         "." + std::to_string(EIGEN_MINOR_VERSION) + ", boost " + BOOST_LIB_VERSION + ")";
}

int run(const ExperimentConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log, std::ostream& err) {
  auto report = [&](const char* kind, const std::string& msg) {
    std::string m = msg;
    std::replace(m.begin(), m.end(), '"', '\'');
    err << "error kind=" << kind << " message=\"" << m << "\"\n";
  };
  try {
    const CsvTable table = run_experiment(cfg, log);
    std::filesystem::create_directories(out_dir);
    const std::string name = experiment_name(cfg.experiment);
    {
      std::ofstream csv(out_dir / (name + ".csv"));
      csv << table.str();
      if (!csv) throw NumericalError("could not write " + (out_dir / (name + ".csv")).string());
    }
    {
      std::ofstream meta(out_dir / (name + ".meta"));
      meta << "# " << version_string() << "\n" << echo_config(cfg);
      if (!meta) throw NumericalError("could not write " + (out_dir / (name + ".meta")).string());
    }
    log << "wrote " << (out_dir / (name + ".csv")).string() << "\n";
    return 0;
  } catch (const Error& e) {
    report(error_kind_name(e.kind()), e.what());
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    report("numerical", e.what());
    return 3;
  }
}

}  // namespace semiweyl::cli
