#include "cli.hpp"

#include <cinttypes>
#include <cstdio>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pbergman/analysis.hpp"
#include "pbergman/error.hpp"
#include "pbergman/floquet.hpp"
#include "pbergman/io.hpp"
#include "pbergman/kernels.hpp"
#include "verify.hpp"

#ifndef PBERGMAN_VERSION
#define PBERGMAN_VERSION "0.0.0"
#endif

namespace pbergman::cli {

namespace {

using nlohmann::json;

struct RunConfig {
  std::string command;
  std::string cell = "strip:0.5";
  std::string map_path;
  std::string grid;
  std::string out;
  std::string method = "closed";
  std::string point;
  std::string w = "0,0";
  std::string function = "inv2";
  std::string weight = "constant";
  double tol = 1.0;
  std::uint64_t seed = 1;
  double rho_perturb = 0.0;
  double mollify = 0.0;
  int window = 32;
  int n_eta = 65;
  int order = 8;
  int n_max = 8;

  std::string canonical() const {
    std::ostringstream os;
    os << std::setprecision(17) << "command=" << command << ";cell=" << cell << ";map=" << map_path
       << ";grid=" << grid << ";method=" << method << ";point=" << point << ";w=" << w
       << ";function=" << function << ";weight=" << weight << ";tol=" << tol << ";seed=" << seed
       << ";rho-perturb=" << rho_perturb << ";mollify=" << mollify << ";window=" << window
       << ";eta=" << n_eta << ";order=" << order << ";n-max=" << n_max;
    return os.str();
  }
};

std::string hex64(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

std::string header(const RunConfig& c) {
  std::ostringstream os;
  os << "# pbergman " << PBERGMAN_VERSION << "\n# command: " << c.command
     << "\n# config-hash: " << hex64(fnv1a(c.canonical())) << "\n# seed: " << c.seed << "\n";
  return os.str();
}

[[noreturn]] void bad_input(const std::string& what) { throw Error(ErrorKind::InvalidArgument, what); }

double parse_double(const std::string& s, const std::string& what) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    bad_input("cannot parse " + what + " from '" + s + "'");
  }
  if (pos != s.size()) bad_input("cannot parse " + what + " from '" + s + "'");
  return v;
}

/// "re,im" or "re"
cplx parse_point(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) return {parse_double(s, "point"), 0.0};
  return {parse_double(s.substr(0, comma), "point"), parse_double(s.substr(comma + 1), "point")};
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) parts.push_back(cur);
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

/// "x0:x1:nx,y0:y1:ny"
std::vector<cplx> parse_grid(const std::string& g) {
  const auto axes = split(g, ',');
  if (axes.size() != 2) bad_input("grid must look like x0:x1:nx,y0:y1:ny");
  std::vector<double> xs, ys;
  for (int k = 0; k < 2; ++k) {
    const auto f = split(axes[k], ':');
    if (f.size() != 3) bad_input("grid must look like x0:x1:nx,y0:y1:ny");
    const double a = parse_double(f[0], "grid bound"), b = parse_double(f[1], "grid bound");
    const double nd = parse_double(f[2], "grid count");
    if (nd < 1 || nd != std::floor(nd)) bad_input("grid is empty");
    const int n = static_cast<int>(nd);
    auto& axis = k == 0 ? xs : ys;
    for (int i = 0; i < n; ++i) axis.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
  }
  std::vector<cplx> pts;
  for (double y : ys)
    for (double x : xs) pts.emplace_back(x, y);
  return pts;
}

struct Setup {
  PeriodicCellSpec cell;
  AnnulusMapPtr map;
  std::optional<SCParams> params;
  bool builtin = false;
};

PeriodicCellSpec resolve_cell(const std::string& c) {
  if (c.rfind("strip:", 0) == 0) return rectangle_cell(parse_double(c.substr(6), "strip half-height"));
  if (c == "zigzag") return zigzag_cell();
  if (c.rfind("zigzag:", 0) == 0) return zigzag_cell(parse_double(c.substr(7), "zigzag depth"));
  return load_cell_spec(c);
}

Setup resolve_map(const RunConfig& c) {
  Setup s;
  if (!c.map_path.empty()) {
    const MapArchive a = load_map_archive(c.map_path);
    build_cell(a.cell);
    s.cell = a.cell;
    s.params = a.params;
    s.map = make_sc_map(a.cell, a.params);
    return s;
  }
  if (c.cell.rfind("strip:", 0) == 0) {
    const double h = parse_double(c.cell.substr(6), "strip half-height");
    s.map = builtin_strip_map(h);
    s.cell = s.map->cell();
    s.builtin = true;
    return s;
  }
  s.cell = resolve_cell(c.cell);
  build_cell(s.cell);
  s.params = solve_sc_parameters(s.cell);
  s.map = make_sc_map(s.cell, *s.params);
  return s;
}

void emit(const RunConfig& c, const std::string& text, std::ostream& out) {
  if (c.out.empty())
    out << text;
  else
    write_text_file(c.out, text);
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

// ---------------------------------------------------------------------------

int cmd_map_solve(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const PeriodicCellSpec cell = resolve_cell(c.cell);
  build_cell(cell);
  ScSolveOptions opts;
  opts.vertex_tol = 1e-8 * c.tol;
  SCParams p;
  bool ok = true;
  try {
    p = solve_sc_parameters(cell, std::nullopt, opts);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NoConvergence) throw;
    err << e.what() << "\n";
    return kVerificationFailed;
  }
  ok = p.max_vertex_residual < opts.vertex_tol;
  MapArchive a{cell, p, {{"tool", "pbergman"}, {"version", PBERGMAN_VERSION},
                         {"config_hash", hex64(fnv1a(c.canonical()))}, {"seed", std::to_string(c.seed)}}};
  const std::string text = serialize_map_archive(a);
  std::ostringstream rep;
  rep << header(c) << "rho: " << fmt(p.rho) << "\nmax_vertex_residual: " << fmt(p.max_vertex_residual)
      << "\niterations: " << p.iterations << "\nconverged: " << (p.converged ? "true" : "false")
      << "\nstatus: " << p.status << "\n";
  if (c.out.empty()) {
    out << text;
    err << rep.str();
  } else {
    write_text_file(c.out, text);
    out << rep.str();
  }
  return ok ? kOk : kVerificationFailed;
}

int cmd_kernel(const RunConfig& c, std::ostream& out, std::ostream&) {
  std::vector<cplx> zs;
  if (!c.point.empty())
    zs.push_back(parse_point(c.point));
  else if (!c.grid.empty())
    zs = parse_grid(c.grid);
  else
    bad_input("kernel needs --point or --grid");
  if (zs.empty()) bad_input("grid is empty");
  const cplx w = parse_point(c.w);

  std::vector<KernelMethod> methods;
  if (c.method == "closed" || c.method == "all") methods.push_back(KernelMethod::closed);
  if (c.method == "eta_assembly" || c.method == "all") methods.push_back(KernelMethod::eta_assembly);
  if (c.method == "t_integral" || c.method == "all") methods.push_back(KernelMethod::t_integral);
  if (methods.empty()) bad_input("unknown method '" + c.method + "'");

  const Setup s = resolve_map(c);
  const KernelContext ctx(s.map);
  std::ostringstream os;
  os << header(c) << "re_z,im_z,re_w,im_w,re_K,im_K,method,deviation\n" << std::setprecision(17);
  double max_dev = 0.0;
  for (cplx z : zs) {
    std::vector<std::pair<const char*, cplx>> vals;
    for (auto m : methods) {
      switch (m) {
        case KernelMethod::closed:
          vals.emplace_back("closed", periodic_kernel_closed(ctx, z, w));
          break;
        case KernelMethod::eta_assembly:
          vals.emplace_back("eta_assembly", periodic_kernel_eta_assembly(ctx, z, w));
          break;
        case KernelMethod::t_integral:
          vals.emplace_back("t_integral", periodic_kernel_t_integral(ctx, z, w));
          break;
      }
    }
    double dev = 0.0;
    for (const auto& a : vals)
      for (const auto& b : vals) dev = std::max(dev, std::abs(a.second - b.second) / std::abs(b.second));
    max_dev = std::max(max_dev, dev);
    for (const auto& [name, k] : vals)
      os << z.real() << ',' << z.imag() << ',' << w.real() << ',' << w.imag() << ',' << k.real() << ','
         << k.imag() << ',' << name << ',' << dev << '\n';
  }
  os << "# summary max_deviation=" << max_dev << " points=" << zs.size() << " methods=" << c.method << "\n";
  emit(c, os.str(), out);
  return kOk;
}

std::function<cplx(cplx)> test_function(const std::string& name) {
  if (name == "inv2") return [](cplx z) { const cplx d = z - cplx(0, 2); return 1.0 / (d * d); };
  if (name == "inv1") return [](cplx z) { return 1.0 / (z - cplx(0, 2)); };
  if (name == "gauss") return [](cplx z) { return std::exp(-z * z); };
  bad_input("unknown function '" + name + "' (inv1, inv2, gauss)");
}

int cmd_floquet(const RunConfig& c, std::ostream& out, std::ostream&) {
  if (c.window < 0 || c.n_eta < 1 || c.order < 1) bad_input("window, eta and order must be positive");
  const PeriodicCellSpec cell = c.map_path.empty() ? resolve_cell(c.cell) : load_map_archive(c.map_path).cell;
  const CellRegion region = build_cell(cell);
  std::optional<MollifierEps> mol;
  if (c.mollify > 0.0) mol = MollifierEps(c.mollify);
  const SampledFunction f{test_function(c.function), c.window, c.function};
  ForwardOptions fo;
  fo.order = c.order;
  fo.n_eta = c.n_eta;
  ForwardReport fr;
  const FloquetField g = floquet_forward(f, region, mol, fo, &fr);
  const double transform_sq = transform_inner_product(g, g).real();
  const auto qp = check_quasiperiodicity(g, 1e-8 * c.tol);
  std::ostringstream os;
  os << header(c) << std::setprecision(17) << "# window: " << fr.window << "\n# eta_points: " << g.num_eta()
     << "\n# norm_domain_sq: " << fr.running_norm << "\n# norm_transform_sq: " << transform_sq
     << "\n# quasiperiodicity_residual: " << qp.max_residual << "\n";
  if (fr.truncation_warning) os << "# warning: " << fr.message << "\n";
  write_field_csv(g, os);
  emit(c, os.str(), out);
  return kOk;
}

WeightSpec parse_weight(const std::string& w) {
  if (w == "constant") return constant_weight();
  if (w.rfind("stretched", 0) == 0) {
    const auto parts = split(w, ':');
    const double b = parts.size() > 1 ? parse_double(parts[1], "weight power") : 0.5;
    const double a = parts.size() > 2 ? parse_double(parts[2], "weight scale") : 1.0;
    return stretched_exponential_weight(b, a);
  }
  bad_input("unknown weight '" + w + "' (constant, stretched[:b[:scale]])");
}

int cmd_decay(const RunConfig& c, std::ostream& out, std::ostream&) {
  const Setup s = resolve_map(c);
  const KernelContext ctx(s.map);
  const DecayFit fit = decay_profile(ctx, default_decay_probes(ctx), c.n_max);
  std::ostringstream os;
  os << header(c) << std::setprecision(17) << "# rate: " << fit.rate << "\n# rate_full: " << fit.rate_full
     << "\n# rate_half: " << fit.rate_half << "\n# fit_residual: " << fit.residual << "\n# c_low: " << fit.c_low
     << "\n# c_high: " << fit.c_high << "\n# comparison: " << fit.comparison() << "\nn,peak,fit\n";
  for (std::size_t i = 0; i < fit.n.size(); ++i)
    os << fit.n[i] << ',' << fit.peak[i] << ',' << std::exp(fit.intercept - fit.rate * fit.n[i]) << '\n';
  emit(c, os.str(), out);
  return kOk;
}

int cmd_schur(const RunConfig& c, std::ostream& out, std::ostream&) {
  if (c.window < 1) bad_input("window must be positive");
  const WeightSpec w = parse_weight(c.weight);
  const Setup s = resolve_map(c);
  const KernelContext ctx(s.map);
  const SchurReport r = schur_bound(ctx, w, c.window);
  std::ostringstream os;
  os << header(c) << std::setprecision(17) << "weight: " << w.name << "\nwindow: " << r.window
     << "\nsup_row: " << r.sup_row << "\nsup_row_doubled: " << r.sup_row_doubled
     << "\nstability: " << r.stability << "\nsup_probe: " << r.sup_probe.real() << ',' << r.sup_probe.imag()
     << "\nm,contribution\n";
  const int W2 = static_cast<int>(r.per_period.size() / 2);
  for (std::size_t i = 0; i < r.per_period.size(); ++i)
    os << static_cast<int>(i) - W2 << ',' << r.per_period[i] << '\n';
  emit(c, os.str(), out);
  return r.stability < 0.01 * c.tol ? kOk : kVerificationFailed;
}

int cmd_verify(const RunConfig& c, std::ostream& out, std::ostream& err) {
  if (c.tol < 0.0) bad_input("tolerance multiplier must be non-negative");
  const Setup s = resolve_map(c);
  const KernelContext ctx(s.map);
  VerifyOptions vo;
  vo.tol_scale = c.tol;
  vo.seed = c.seed;
  vo.rho_perturb = c.rho_perturb;
  const auto results = run_verify_suite(ctx, vo);
  std::ostringstream os;
  os << json{{"tool", "pbergman"},
             {"version", PBERGMAN_VERSION},
             {"config_hash", hex64(fnv1a(c.canonical()))},
             {"seed", c.seed}}
            .dump()
     << "\n";
  bool all = true;
  for (const auto& r : results) {
    json j = {{"check", r.check}, {"value", r.value}, {"bound", r.bound}, {"pass", r.pass}};
    if (!std::isfinite(r.value)) j["value"] = "inf";
    os << j.dump() << "\n";
    if (!r.pass) {
      all = false;
      err << "FAILED " << r.check << "\n";
    }
  }
  emit(c, os.str(), out);
  return all ? kOk : kVerificationFailed;
}

int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::IoError:
      return kIoError;
    case ErrorKind::InvalidArgument:
    case ErrorKind::InvalidCell:
    case ErrorKind::InvalidDelta:
    case ErrorKind::ParseError:
    case ErrorKind::OutOfDomain:
    case ErrorKind::BranchViolation:
    case ErrorKind::NotAWeight:
      return kInputError;
    default:
      return kVerificationFailed;
  }
}

}  // namespace

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bergman kernels of periodic planar domains", "pbergman"};
  app.require_subcommand(1);
  app.set_version_flag("--version", PBERGMAN_VERSION);
  RunConfig c;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--cell", c.cell, "Cell: strip:<h>, zigzag[:<depth>] or a JSON cell file")
        ->capture_default_str();
    sub->add_option("--map", c.map_path, "Solved map archive (overrides --cell)");
    sub->add_option("--out", c.out, "Output file (default: standard output)");
    sub->add_option("--seed", c.seed, "Seed for random probes")->capture_default_str();
    sub->add_option("--tol", c.tol, "Multiplier applied to tolerances")->capture_default_str();
  };

  auto* solve = app.add_subcommand("map-solve", "Solve the SC parameter problem and write an archive");
  common(solve);

  auto* kernel = app.add_subcommand("kernel", "Evaluate the periodic kernel on a grid");
  common(kernel);
  kernel->add_option("--grid", c.grid, "z grid x0:x1:nx,y0:y1:ny");
  kernel->add_option("--point", c.point, "single z as re,im");
  kernel->add_option("--w", c.w, "second argument as re,im")->capture_default_str();
  kernel->add_option("--method", c.method, "closed | eta_assembly | t_integral | all")->capture_default_str();

  auto* floq = app.add_subcommand("floquet", "Floquet transform of a test function (CSV field dump)");
  common(floq);
  floq->add_option("--function", c.function, "inv1 | inv2 | gauss")->capture_default_str();
  floq->add_option("--window", c.window, "truncation |m| <= window (0: adaptive)")->capture_default_str();
  floq->add_option("--eta", c.n_eta, "eta grid size (raised to 2 window + 1)")->capture_default_str();
  floq->add_option("--order", c.order, "cell rule order")->capture_default_str();
  floq->add_option("--mollify", c.mollify, "Gaussian mollifier eps (0: off)")->capture_default_str();

  auto* verify = app.add_subcommand("verify", "Run the invariant suite (JSON lines)");
  common(verify);
  verify->add_option("--rho-perturb", c.rho_perturb, "relative error injected into rho")
      ->group("");

  auto* decay = app.add_subcommand("decay", "Fit the decay rate of K(z, 0)");
  common(decay);
  decay->add_option("--n-max", c.n_max, "last period of the fit")->capture_default_str();

  auto* schur = app.add_subcommand("schur", "Schur test row integrals");
  common(schur);
  schur->add_option("--weight", c.weight, "constant | stretched[:b[:scale]]")->capture_default_str();
  schur->add_option("--window", c.window, "period window")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (solve->parsed()) {
      c.command = "map-solve";
      return cmd_map_solve(c, out, err);
    }
    if (kernel->parsed()) {
      c.command = "kernel";
      return cmd_kernel(c, out, err);
    }
    if (floq->parsed()) {
      c.command = "floquet";
      return cmd_floquet(c, out, err);
    }
    if (verify->parsed()) {
      c.command = "verify";
      return cmd_verify(c, out, err);
    }
    if (decay->parsed()) {
      c.command = "decay";
      return cmd_decay(c, out, err);
    }
    if (schur->parsed()) {
      c.command = "schur";
      if (c.window == 32 && schur->count("--window") == 0) c.window = 16;
      return cmd_schur(c, out, err);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kVerificationFailed;
  }
  return kInputError;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.push_back("pbergman");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace pbergman::cli
