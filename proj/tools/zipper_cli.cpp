// Command-line front end: validates zippers and emits the pressure,
// spectrum, Holder, cone, and rendering artifacts as CSV/JSON/SVG.
//
// Exit codes: 0 success, 1 domain/validation failure, 2 usage/config error.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "zipcurve/cones.hpp"
#include "zipcurve/core.hpp"
#include "zipcurve/derham.hpp"
#include "zipcurve/holder.hpp"
#include "zipcurve/json_io.hpp"
#include "zipcurve/pressure.hpp"
#include "zipcurve/rng.hpp"
#include "zipcurve/symbolic.hpp"

namespace {

using namespace zipcurve;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hash_line(const std::string& canonical) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a(canonical)));
  return std::string("# config-hash=") + buf;
}

std::vector<double> parse_grid(const std::string& spec) {
  double lo, hi, step;
  if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3)
    throw ConfigError("grid spec must be lo:hi:step, got \"" + spec + "\"");
  return make_grid(lo, hi, step);
}

std::vector<int> parse_depths(const std::string& spec) {
  std::vector<int> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
  if (out.empty()) throw ConfigError("empty depth list");
  return out;
}

struct Source {
  std::string preset;
  double omega = 0.1;
  std::string zipper_path;

  Zipper resolve() const {
    if (!preset.empty() && !zipper_path.empty())
      throw ConfigError("give exactly one of --preset and --zipper");
    if (!preset.empty()) {
      if (preset != "derham") throw ConfigError("unknown preset \"" + preset + "\"");
      return derham_build(omega).zipper;
    }
    if (zipper_path.empty()) throw ConfigError("give exactly one of --preset and --zipper");
    try {
      return load_zipper_file(zipper_path);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }

  std::string canonical() const {
    return preset.empty() ? "file:" + zipper_path : "preset:" + preset + ":" + fmt(omega);
  }
};

void add_source(CLI::App* cmd, Source& src) {
  cmd->add_option("--preset", src.preset, "preset name (derham)");
  cmd->add_option("--omega", src.omega, "de Rham parameter in (0, 1/2)");
  cmd->add_option("--zipper", src.zipper_path, "zipper JSON file");
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  const std::string path = dir + "/" + name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  return out;
}

int cmd_validate(const Source& src, double tol, int q) {
  const Zipper z = src.resolve();
  const ValidationReport rep = validate_zipper(z, tol, q);
  std::cout << report_to_json(rep).dump(2) << "\n";
  return rep.pass ? 0 : 1;
}

PressureCurve build_curve(const Zipper& z, const std::vector<double>& grid,
                          const std::vector<int>& depths, MatrixNorm norm) {
  PressureOptions opt;
  opt.depths = depths;
  opt.norm = norm;
  return pressure_curve(PressureEvaluator(system_of(z), opt), grid);
}

int cmd_pressure(const Source& src, const std::string& out_dir, const std::string& tspec,
                 const std::string& dspec, const std::string& norm_name) {
  const MatrixNorm norm = norm_name == "one" ? MatrixNorm::one : MatrixNorm::spectral;
  const Zipper z = src.resolve();
  const std::vector<double> grid = parse_grid(tspec);
  const std::vector<int> depths = parse_depths(dspec);
  const PressureCurve c = build_curve(z, grid, depths, norm);

  std::ofstream out = open_out(out_dir, "pressure.csv");
  out << "t";
  for (int n : depths) out << ",Pn_" << n;
  out << ",P,dP,residual\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out << fmt(grid[i]);
    for (std::size_t di = 0; di < depths.size(); ++di) out << "," << fmt(c.per_depth[di][i]);
    out << "," << fmt(c.pressure[i]) << "," << fmt(c.derivative[i]) << "," << fmt(c.residual[i])
        << "\n";
  }
  out << hash_line("pressure|" + src.canonical() + "|t=" + tspec + "|depths=" + dspec +
                   "|norm=" + norm_name)
      << "\n";
  std::cout << "pressure.csv: d0=" << fmt9(c.d0) << " alpha_hat=" << fmt9(c.alpha_hat)
            << " alpha_min=" << fmt9(c.alpha_min) << " alpha_max=" << fmt9(c.alpha_max)
            << (c.concave_ok ? "" : " [concavity warning]") << "\n";
  return 0;
}

int cmd_spectrum(const Source& src, const std::string& out_dir, const std::string& tspec,
                 const std::string& dspec, const std::string& bspec, const std::string& sym_opt,
                 const std::string& assa_opt, int r_exp, double delta) {
  const Zipper z = src.resolve();
  const PressureCurve c =
      build_curve(z, parse_grid(tspec), parse_depths(dspec), MatrixNorm::spectral);
  const MatrixSystem sys = system_of(z);

  bool symmetric = false;
  if (sym_opt == "yes")
    symmetric = true;
  else if (sym_opt == "auto") {
    symmetric = std::fabs(z.weights.front() - z.weights.back()) < 1e-12;
    if (symmetric) {
      Mat p0 = Mat::identity(z.dim), p1 = p0;
      for (int k = 0; k < 30; ++k) {
        p0 = p0 * z.maps.front().linear;
        p1 = p1 * z.maps.back().linear;
      }
      symmetric = std::fabs(spectral_norm(p0) / spectral_norm(p1) - 1.0) < 1e-6;
    }
  }
  bool assumption_a = false;
  if (assa_opt == "yes")
    assumption_a = true;
  else if (assa_opt == "auto" && z.dim == 2) {
    std::vector<Mat> mats;
    for (const AffineMap& f : z.maps) mats.push_back(f.linear);
    const ConjugationResult conj = conjugation_search(mats);
    if (conj.found) {
      const AssumptionAReport rep =
          check_assumption_a(conjugate_zipper(z, conj.transform),
                             ProjectiveCone::positive_quadrant(), 256, 1e-4);
      assumption_a = rep.pass;
    }
  }

  std::vector<double> betas;
  if (bspec == "auto") {
    const double span = c.alpha_max - c.alpha_min;
    if (span < 1e-9)
      betas = {c.alpha_hat};
    else
      for (int i = 0; i <= 40; ++i) betas.push_back(c.alpha_min + span * i / 40.0);
  } else {
    betas = parse_grid(bspec);
  }

  const SpectrumCurve s = spectrum_curve(c, betas, symmetric, assumption_a);
  {
    std::ofstream out = open_out(out_dir, "spectrum.csv");
    out << "beta,D,t_star,window_tag,regular_tag\n";
    for (const SpectrumPoint& p : s.points)
      out << fmt(p.beta) << "," << fmt(p.value) << "," << fmt(p.t_star) << "," << p.window << ","
          << p.regular_window << "\n";
    out << hash_line("spectrum|" + src.canonical() + "|t=" + tspec + "|depths=" + dspec +
                     "|betas=" + bspec + "|sym=" + (symmetric ? "1" : "0") +
                     "|assA=" + (assumption_a ? "1" : "0"))
        << "\n";
  }
  {
    const double r = std::ldexp(1.0, -r_exp);
    const CountingSpectrum cs = counting_spectrum(sys, r, delta, betas);
    std::ofstream out = open_out(out_dir, "counting.csv");
    out << "beta,D_count,bin_count\n";
    for (std::size_t i = 0; i < cs.beta.size(); ++i)
      out << fmt(cs.beta[i]) << "," << fmt(cs.value[i]) << "," << cs.bin_count[i] << "\n";
    out << hash_line("counting|" + src.canonical() + "|r_exp=" + std::to_string(r_exp) +
                     "|delta=" + fmt(delta) + "|betas=" + bspec)
        << "\n";
  }
  std::cout << "spectrum.csv + counting.csv written (symmetric=" << symmetric
            << ", assumption_a=" << assumption_a << ")\n";
  return 0;
}

int cmd_holder(const Source& src, const std::string& out_dir, int points, int sym_depth,
               int scale_count, int samples_per_scale, std::uint64_t seed) {
  const Zipper z = src.resolve();
  const MatrixSystem sys = system_of(z);
  const AttractorBound bound = attractor_bound(z);
  std::ofstream out = open_out(out_dir, "holder.csv");
  out << "x,symbolic_final,direct_min,direct_regression\n";
  Rng rng(seed);
  for (int i = 0; i < points; ++i) {
    const double x = rng.uniform(0.05, 0.95);
    const SymbolStream s(coding_of(z, x, sym_depth), {0});
    const double sym = symbolic_exponent(sys, s, sym_depth).back();
    DirectOptions opt;
    opt.scale_count = scale_count;
    opt.samples_per_scale = samples_per_scale;
    opt.seed = Rng::derive(seed, 0x1000 + i);
    const HolderEstimate est = direct_exponent(z, x, opt, &bound);
    out << fmt(x) << "," << fmt(sym) << "," << fmt(est.direct_min) << ","
        << fmt(est.direct_regression) << "\n";
  }
  out << hash_line("holder|" + src.canonical() + "|points=" + std::to_string(points) +
                   "|sym_depth=" + std::to_string(sym_depth) + "|scales=" +
                   std::to_string(scale_count) + "|sps=" + std::to_string(samples_per_scale) +
                   "|seed=" + std::to_string(seed))
      << "\n";
  std::cout << "holder.csv written (" << points << " points)\n";
  return 0;
}

int cmd_cones(const Source& src, const std::string& out_dir, double margin, int max_depth,
              int sample_count, int level, double delta, int direction_depth,
              std::uint64_t seed) {
  const Zipper z = src.resolve();
  if (z.dim != 2) throw std::domain_error("cones: diagnostics are planar (d = 2)");
  std::vector<Mat> mats;
  for (const AffineMap& f : z.maps) mats.push_back(f.linear);

  nlohmann::json j;
  const ConeSearchResult cone = invariant_cone_2d(mats, 200, margin);
  j["invariant_cone"] = report_to_json(cone);

  const PositivityReport pos = check_positivity(mats);
  j["positivity"] = {{"positive", pos.positive}, {"min_entry", pos.min_entry}};

  const ConjugationResult conj = conjugation_search(mats);
  j["conjugation"] = report_to_json(conj);

  if (conj.found) {
    const AssumptionAReport assa = check_assumption_a(
        conjugate_zipper(z, conj.transform), ProjectiveCone::positive_quadrant(), 256, margin);
    j["assumption_a"] = report_to_json(assa)["conditions"];
    j["assumption_a_pass"] = assa.pass;
  } else if (cone.found) {
    const AssumptionAReport assa = check_assumption_a(z, cone.cone, 256, margin);
    j["assumption_a"] = report_to_json(assa)["conditions"];
    j["assumption_a_pass"] = assa.pass;
  }

  const SplittingDiagnostic split = splitting_diagnostic(mats, max_depth, sample_count, seed, 2);
  j["splitting"] = report_to_json(split);

  const WellOrderedReport wo = well_ordered_check(z, level, delta, direction_depth);
  j["well_ordered"] = report_to_json(wo);

  std::ofstream out = open_out(out_dir, "cones.json");
  out << j.dump(2) << "\n";

  std::cout << "invariant cone : "
            << (cone.found ? "found, margin " + fmt9(cone.margin) : cone.message) << "\n"
            << "positivity     : " << (pos.positive ? "positive" : "not positive")
            << " (min entry " << fmt9(pos.min_entry) << ")\n"
            << "conjugation    : "
            << (conj.found ? family_name(conj.family) + " @ " + fmt9(conj.parameter)
                           : "none found (best min entry " + fmt9(conj.best_min_entry) + ")")
            << "\n"
            << "splitting      : decay " << fmt9(split.decay_rate) << ", residual "
            << fmt9(split.fit_residual) << (split.no_splitting ? " [no splitting]" : "") << "\n"
            << "well-ordered   : "
            << (wo.refused ? "refused: " + wo.diagnostic : (wo.pass ? "pass (evidence)" : "FAIL"))
            << "\n";
  return 0;
}

int cmd_render(const Source& src, const std::string& out_dir, int depth) {
  const Zipper z = src.resolve();
  if (z.dim != 2) throw std::domain_error("render: planar curves only");
  const auto pts = sample_curve(z, depth);

  {
    std::ofstream out = open_out(out_dir, "curve.csv");
    out << "parameter,x,y\n";
    for (const CurvePoint& p : pts)
      out << fmt(p.parameter) << "," << fmt(p.position[0]) << "," << fmt(p.position[1]) << "\n";
    out << hash_line("render|" + src.canonical() + "|depth=" + std::to_string(depth)) << "\n";
  }

  // viewBox from the vertex bounding box, 5% padding, y flipped for SVG
  double x0 = z.vertices[0][0], x1 = x0, y0 = z.vertices[0][1], y1 = y0;
  for (const Vec& v : z.vertices) {
    x0 = std::min(x0, v[0]);
    x1 = std::max(x1, v[0]);
    y0 = std::min(y0, v[1]);
    y1 = std::max(y1, v[1]);
  }
  const double padx = 0.05 * std::max(x1 - x0, 1e-9), pady = 0.05 * std::max(y1 - y0, 1e-9);
  const double vbx = x0 - padx, vby = -(y1 + pady);
  const double vbw = (x1 - x0) + 2 * padx, vbh = (y1 - y0) + 2 * pady;

  std::ofstream out = open_out(out_dir, "curve.svg");
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << fmt9(vbx) << " " << fmt9(vby)
      << " " << fmt9(vbw) << " " << fmt9(vbh) << "\">\n"
      << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"" << fmt9(vbh / 512.0)
      << "\" points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) out << " ";
    out << fmt9(pts[i].position[0]) << "," << fmt9(-pts[i].position[1]);
  }
  out << "\"/>\n</svg>\n";
  std::cout << "curve.svg + curve.csv written (" << pts.size() << " points)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"affine zipper curves: pressure, spectrum, Holder exponents, cone certificates"};
  app.require_subcommand(1);
  app.footer("ZIPPER_THREADS caps worker threads (0 or unset = auto).");

  Source src;
  std::string out_dir = ".";
  std::string tspec = "-10:10:0.05";
  std::string dspec = "4,8,12,16,20";
  std::string bspec = "auto";
  std::string norm_name = "spectral";
  std::string sym_opt = "auto", assa_opt = "auto";
  double tol = 1e-9, delta = 0.05, margin = 1e-3, wo_delta = 0.05;
  int q = 8, r_exp = 14, points = 8, sym_depth = 20, scale_count = 16, sps = 8;
  int render_depth = 12, max_depth = 12, sample_count = 4096, level = 0, direction_depth = 8;
  std::uint64_t seed = 1;

  CLI::App* validate = app.add_subcommand("validate", "check the zipper invariants");
  add_source(validate, src);
  validate->add_option("--tol", tol, "residual tolerance");
  validate->add_option("--contraction-depth", q, "joint-contraction check depth");

  CLI::App* pressure = app.add_subcommand("pressure", "tabulate the pressure function");
  add_source(pressure, src);
  pressure->add_option("--out", out_dir, "output directory");
  pressure->add_option("--t", tspec, "t grid lo:hi:step");
  pressure->add_option("--depths", dspec, "comma-separated depth schedule");
  pressure->add_option("--norm", norm_name, "matrix norm: spectral|one");

  CLI::App* spectrum = app.add_subcommand("spectrum", "Legendre and counting spectra");
  add_source(spectrum, src);
  spectrum->add_option("--out", out_dir, "output directory");
  spectrum->add_option("--t", tspec, "t grid lo:hi:step");
  spectrum->add_option("--depths", dspec, "depth schedule");
  spectrum->add_option("--betas", bspec, "beta grid lo:hi:step or auto");
  spectrum->add_option("--symmetric", sym_opt, "auto|yes|no");
  spectrum->add_option("--assumption-a", assa_opt, "auto|yes|no");
  spectrum->add_option("--r-exp", r_exp, "counting partition scale r = 2^-k");
  spectrum->add_option("--delta", delta, "counting bin half-width");

  CLI::App* holder = app.add_subcommand("holder", "pointwise exponent estimates");
  add_source(holder, src);
  holder->add_option("--out", out_dir, "output directory");
  holder->add_option("--points", points, "number of sample parameters");
  holder->add_option("--sym-depth", sym_depth, "symbolic estimator depth");
  holder->add_option("--scales", scale_count, "number of dyadic scales");
  holder->add_option("--samples-per-scale", sps, "annulus samples per scale");
  holder->add_option("--seed", seed, "random seed");

  CLI::App* cones = app.add_subcommand("cones", "cone and splitting certificates");
  add_source(cones, src);
  cones->add_option("--out", out_dir, "output directory");
  cones->add_option("--margin", margin, "angular margin");
  cones->add_option("--max-depth", max_depth, "splitting diagnostic depth");
  cones->add_option("--sample-count", sample_count, "words per splitting depth");
  cones->add_option("--level", level, "well-ordered refinement level");
  cones->add_option("--delta", wo_delta, "well-ordered direction ball radius");
  cones->add_option("--direction-depth", direction_depth, "stable direction word length");
  cones->add_option("--seed", seed, "random seed");

  CLI::App* render = app.add_subcommand("render", "sample the curve to SVG and CSV");
  add_source(render, src);
  render->add_option("--out", out_dir, "output directory");
  render->add_option("--depth", render_depth, "subdivision depth");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (validate->parsed()) return cmd_validate(src, tol, q);
    if (pressure->parsed()) return cmd_pressure(src, out_dir, tspec, dspec, norm_name);
    if (spectrum->parsed())
      return cmd_spectrum(src, out_dir, tspec, dspec, bspec, sym_opt, assa_opt, r_exp, delta);
    if (holder->parsed())
      return cmd_holder(src, out_dir, points, sym_depth, scale_count, sps, seed);
    if (cones->parsed())
      return cmd_cones(src, out_dir, margin, max_depth, sample_count, level, wo_delta,
                       direction_depth, seed);
    if (render->parsed()) return cmd_render(src, out_dir, render_depth);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
