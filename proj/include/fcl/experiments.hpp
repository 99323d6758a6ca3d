#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "fcl/circle_algebra.hpp"
#include "fcl/cones.hpp"
#include "fcl/halfline_symbols.hpp"
#include "fcl/io.hpp"
#include "fcl/toeplitz.hpp"

namespace fcl {

struct ExperimentConfig {
  std::string name;
  std::optional<long> n;
  std::optional<long> grid;
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> surface;
  std::optional<long> k;
  std::string out_dir;
};

struct ExperimentResult {
  Json report;
  bool pass = false;
  std::vector<std::pair<std::string, std::string>> files;  // extra artifacts: file name, content
};

struct CatalogEntry {
  std::string name;
  std::string anchor;
  bool randomized;
};

inline const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> entries = {
      {"derham", "Euler characteristic of a surface as the index of its de Rham complex", false},
      {"counterexample", "exact mapping cone with a non-exact kernel complex", true},
      {"cone-props", "cone cohomology splits into kernel and shifted cokernel cohomology", true},
      {"hodge", "Hodge parametrix of a complex is itself a complex", true},
      {"lift", "projected complex and its block lift share cohomology", true},
      {"quasilift", "quasicomplexes corrected to complexes, leading blocks kept", true},
      {"circle-index", "Toeplitz index on the Hardy space is minus the winding number", false},
      {"cr-symbol", "Cauchy-Riemann boundary symbol is surjective with kernel e^{-t}", false},
      {"dolbeault-scan", "Dolbeault boundary symbol is exact off the skew diagonal", true},
      {"bott", "kernel bundle of the augmented Dolbeault symbol is the Bott generator", false},
      {"complement", "complementation to a family exact away from the first position", true},
  };
  return entries;
}

inline const CatalogEntry* find_experiment(const std::string& name) {
  for (const auto& e : catalog())
    if (e.name == name) return &e;
  return nullptr;
}

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline Json dims_json(const std::vector<Index>& d) { return Json(d); }

inline bool all_zero(const std::vector<Index>& d) {
  return std::all_of(d.begin(), d.end(), [](Index x) { return x == 0; });
}

}  // namespace detail

/** Self-contained SVG polyline of y against x. */
inline std::string line_plot_svg(const std::vector<double>& x, const std::vector<double>& y, const std::string& title) {
  const double w = 640, h = 360, pad = 40;
  double x0 = *std::min_element(x.begin(), x.end()), x1 = *std::max_element(x.begin(), x.end());
  double y0 = *std::min_element(y.begin(), y.end()), y1 = *std::max_element(y.begin(), y.end());
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << pad << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
  os << "<rect x=\"" << pad << "\" y=\"" << pad << "\" width=\"" << w - 2 * pad << "\" height=\"" << h - 2 * pad
     << "\" fill=\"none\" stroke=\"#888\"/>\n";
  os << "<polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < x.size(); ++i) {
    double px = pad + (x[i] - x0) / (x1 - x0) * (w - 2 * pad);
    double py = h - pad - (y[i] - y0) / (y1 - y0) * (h - 2 * pad);
    os << std::fixed << std::setprecision(2) << px << "," << py << " ";
  }
  os << "\"/>\n</svg>\n";
  return os.str();
}

inline ExperimentResult run_derham(const ExperimentConfig& cfg) {
  const std::string surface = cfg.surface.value_or("sphere");
  FiniteComplex c = derham_demo(surface);
  CohomologyReport h = cohomology(c, cfg.tol.value_or(kDefaultTol));
  const bool sphere = surface.rfind("sphere", 0) == 0;
  std::vector<Index> expected = sphere ? std::vector<Index>{1, 0, 1} : std::vector<Index>{1, 2, 1};
  ExperimentResult r;
  r.report = {{"surface", surface},
              {"spaces", c.spaces},
              {"betti", h.dims},
              {"expected_betti", expected},
              {"euler", h.index},
              {"marginal", h.marginal}};
  r.pass = h.dims == expected && h.index == (sphere ? 2 : 0) && !h.marginal;
  return r;
}

inline ExperimentResult run_counterexample(const ExperimentConfig& cfg) {
  Rng rng(*cfg.seed);
  const double tol = cfg.tol.value_or(kDefaultTol);
  std::vector<std::pair<std::string, Matrix>> cases = {
      {"T1=0", Matrix::Zero(1, 1)}, {"T1=1", Matrix::Identity(1, 1)}, {"T1=random invertible", rng.invertible(3)}};
  ExperimentResult r;
  Json rows = Json::array();
  bool cone_exact = true, nonzero_ker_exact = true, zero_ker_exact = false;
  for (const auto& [label, t1] : cases) {
    ConeDecompositionReport rep = verify_cone_decomposition(counterexample_instance(t1), tol);
    const bool ce = detail::all_zero(rep.cone_dims), ke = detail::all_zero(rep.ker_dims);
    cone_exact = cone_exact && ce;
    if (label == "T1=0") zero_ker_exact = ke;
    else nonzero_ker_exact = nonzero_ker_exact && ke;
    Json row = to_json(rep);
    row["case"] = label;
    row["cone_exact"] = ce;
    row["ker_exact"] = ke;
    rows.push_back(row);
  }
  r.report = {{"cases", rows}, {"cone_exact", cone_exact}, {"ker_exact", nonzero_ker_exact}};
  r.pass = cone_exact && !nonzero_ker_exact && zero_ker_exact;
  return r;
}

inline ExperimentResult run_cone_props(const ExperimentConfig& cfg) {
  Rng rng(*cfg.seed);
  const long trials = cfg.grid.value_or(100);
  const double tol = cfg.tol.value_or(kDefaultTol);
  long failures = 0, marginal = 0;
  Json first_failure;
  for (long i = 0; i < trials; ++i) {
    ComplexMorphism m = random_surjective_morphism(rng, rng.uniform_int(2, 5), 6);
    ConeDecompositionReport rep = verify_cone_decomposition(m, tol);
    if (rep.marginal) ++marginal;
    if (!rep.decomposition_holds) {
      if (failures == 0) first_failure = to_json(rep);
      ++failures;
    }
  }
  ExperimentResult r;
  r.report = {{"trials", trials}, {"failures", failures}, {"marginal", marginal}, {"first_failure", first_failure}};
  r.pass = failures == 0;
  return r;
}

struct HodgeCheck {
  double remainder = 0.0;    // max ||A B + B A - (1 - pi)|| / scale
  double composition = 0.0;  // max ||B_j B_{j+1}|| / scale
};

inline HodgeCheck check_hodge(const FiniteComplex& c, double tol = kDefaultTol) {
  Parametrix p = hodge_parametrix(c, tol);
  CohomologyReport h = cohomology(c, tol);
  HodgeCheck out;
  double bmax = 0.0;
  for (const Matrix& b : p.operators) bmax = std::max(bmax, opnorm(b));
  const double scale = 1.0 + c.scale() * bmax;
  for (int j = 0; j < c.length(); ++j) {
    const Matrix& harmonic = h.harmonic_projectors[static_cast<std::size_t>(j)];
    Matrix sum = c.d(j - 1) * parametrix_op(p, c, j - 1) + parametrix_op(p, c, j) * c.d(j);
    Matrix want = Matrix::Identity(c.dim(j), c.dim(j)) - harmonic;
    if (sum.size()) out.remainder = std::max(out.remainder, opnorm(sum - want) / scale);
  }
  for (std::size_t j = 0; j + 1 < p.operators.size(); ++j) {
    Matrix bb = p.operators[j] * p.operators[j + 1];
    if (bb.size()) out.composition = std::max(out.composition, opnorm(bb) / (scale * (1.0 + bmax)));
  }
  return out;
}

inline ExperimentResult run_hodge(const ExperimentConfig& cfg) {
  Rng rng(*cfg.seed);
  const long trials = cfg.grid.value_or(100);
  const double tol = cfg.tol.value_or(kDefaultTol);
  double worst_r = 0.0, worst_c = 0.0;
  for (long i = 0; i < trials; ++i) {
    FiniteComplex c = random_complex(rng, rng.uniform_int(2, 5), 6);
    HodgeCheck h = check_hodge(c, tol);
    worst_r = std::max(worst_r, h.remainder);
    worst_c = std::max(worst_c, h.composition);
  }
  ExperimentResult r;
  r.report = {{"trials", trials}, {"max_remainder_defect", worst_r}, {"max_composition", worst_c}};
  r.pass = worst_r <= 1e-10 && worst_c <= 1e-10;
  return r;
}

inline ExperimentResult run_lift(const ExperimentConfig& cfg) {
  Rng rng(*cfg.seed);
  const long trials = cfg.grid.value_or(100);
  const double tol = cfg.tol.value_or(kDefaultTol);
  long dim_failures = 0, rank_failures = 0, exact_failures = 0, exact_cases = 0, non_hermitian = 0;
  double worst_exact_remainder = 0.0, worst_bb = 0.0;
  for (long i = 0; i < trials; ++i) {
    const bool exact = i % 5 == 0, hermitian = i % 2 == 1;
    if (!hermitian) ++non_hermitian;
    ProjectedSample s = random_projected_complex(rng, rng.uniform_int(2, 5), 6, exact, hermitian);
    CohomologyReport pcr = projected_cohomology(s.pc, tol);
    LiftedComplex lc = lift(s.pc);
    CohomologyReport lr = lift_cohomology(lc, tol);
    if (pcr.dims != lr.dims || pcr.dims != s.expected_dims) ++dim_failures;
    ProjectedParametrix ep = extract_parametrix(s.pc, lc, hodge_parametrix(lc.lift, tol));
    for (double x : ep.composition_norms) worst_bb = std::max(worst_bb, x);  // reported, not asserted
    for (std::size_t j = 0; j < pcr.dims.size(); ++j)
      if (ep.remainder_ranks[j] > pcr.dims[j]) ++rank_failures;
    if (exact) {
      ++exact_cases;
      double worst = 0.0;
      for (const Matrix& rem : ep.remainders)
        if (rem.size()) worst = std::max(worst, opnorm(rem));
      worst_exact_remainder = std::max(worst_exact_remainder, worst);
      if (!detail::all_zero(std::vector<Index>(ep.remainder_ranks.begin(), ep.remainder_ranks.end())) || worst > 1e-8)
        ++exact_failures;
    }
  }
  ExperimentResult r;
  r.report = {{"trials", trials},
              {"non_hermitian", non_hermitian},
              {"dim_failures", dim_failures},
              {"remainder_rank_failures", rank_failures},
              {"exact_cases", exact_cases},
              {"exact_failures", exact_failures},
              {"max_exact_remainder", worst_exact_remainder},
              {"max_parametrix_composition", worst_bb}};
  r.pass = dim_failures == 0 && rank_failures == 0 && exact_failures == 0;
  return r;
}

/**
 * Projected quasicomplex in upper-triangular form: the leading blocks are a projected
 * complex, the second block column is random (hence not a complex).
 */
inline std::pair<std::vector<Matrix>, std::vector<Matrix>> random_upper_triangular_quasicomplex(
    Rng& rng, std::vector<Index>& leading) {
  ProjectedSample e = random_projected_complex(rng, rng.uniform_int(2, 4), 4, false, false);
  const int len = e.pc.length();
  std::vector<Matrix> ops, projs;
  leading.clear();
  for (int j = 0; j < len; ++j) {
    const Index ne = e.pc.ambient.dim(j), nf = rng.uniform_int(1, 3), rf = rng.uniform_int(0, static_cast<int>(nf));
    RangeFactor ff = random_idempotent(rng, nf, rf, false);
    Matrix p = Matrix::Zero(ne + nf, ne + nf);
    p.topLeftCorner(ne, ne) = e.pc.p(j);
    p.bottomRightCorner(nf, nf) = ff.v * ff.w;
    projs.push_back(p);
    leading.push_back(ne);
  }
  for (int j = 0; j + 1 < len; ++j) {
    const Index ne0 = leading[j], ne1 = leading[j + 1];
    const Index nf0 = projs[j].rows() - ne0, nf1 = projs[j + 1].rows() - ne1;
    Matrix x = rng.gaussian(ne1 + nf1, ne0 + nf0);
    x.leftCols(ne0).setZero();
    Matrix a = projs[j + 1] * x * projs[j];
    a.topLeftCorner(ne1, ne0) = e.pc.ambient.d(j);
    a.bottomLeftCorner(nf1, ne0).setZero();
    ops.push_back(a);
  }
  return {ops, projs};
}

inline ExperimentResult run_quasilift(const ExperimentConfig& cfg) {
  Rng rng(*cfg.seed);
  const long trials = cfg.grid.value_or(50);
  double worst_comp = 0.0, worst_corr = 0.0, worst_upper = 0.0;
  long passthrough_failures = 0, upper_failures = 0;
  for (long i = 0; i < trials; ++i) {
    FiniteComplex c = random_complex(rng, rng.uniform_int(2, 5), 6);
    std::vector<Matrix> ops = c.differentials;
    for (Matrix& a : ops)  // rank-preserving, so the corrections stay of the size of the perturbation
      a = (Matrix::Identity(a.rows(), a.rows()) + 1e-6 * rng.gaussian(a.rows(), a.rows())) * a *
          (Matrix::Identity(a.cols(), a.cols()) + 1e-6 * rng.gaussian(a.cols(), a.cols()));
    QuasiLiftResult q = lift_quasicomplex(ops);
    const double scale = 1.0 + q.complex.scale() * q.complex.scale();
    for (int j = 0; j + 1 < static_cast<int>(ops.size()); ++j)
      worst_comp = std::max(worst_comp, opnorm(q.complex.d(j + 1) * q.complex.d(j)) / scale);
    for (double x : q.corrections) worst_corr = std::max(worst_corr, x);

    QuasiLiftResult same = lift_quasicomplex(c.differentials);
    for (std::size_t j = 0; j < c.differentials.size(); ++j)
      if (!(same.complex.differentials[j].array() == c.differentials[j].array()).all()) {
        ++passthrough_failures;
        break;
      }

    std::vector<Index> lead;
    auto [uops, projs] = random_upper_triangular_quasicomplex(rng, lead);
    ProjectedLiftResult u = lift_quasicomplex_projected(uops, projs, UpperTriangularLayout{lead});
    ProjectedCheck chk = check_projected(u.complex);
    worst_upper = std::max(worst_upper, chk.composition);
    bool ok = chk.ok();
    for (std::size_t j = 0; j < uops.size(); ++j) {
      const Index r0 = lead[j + 1], c0 = lead[j];
      const Matrix& got = u.complex.ambient.differentials[j];
      ok = ok && (got.topLeftCorner(r0, c0).array() == uops[j].topLeftCorner(r0, c0).array()).all();
      ok = ok && (got.bottomLeftCorner(got.rows() - r0, c0).array() == cplx(0.0, 0.0)).all();
    }
    if (!ok) ++upper_failures;
  }
  ExperimentResult r;
  r.report = {{"trials", trials},
              {"max_composition", worst_comp},
              {"max_correction", worst_corr},
              {"passthrough_failures", passthrough_failures},
              {"upper_triangular_failures", upper_failures},
              {"max_upper_composition", worst_upper}};
  r.pass = worst_comp <= 1e-10 && worst_corr <= 1e-4 && passthrough_failures == 0 && upper_failures == 0;
  return r;
}

inline ExperimentResult run_circle_index(const ExperimentConfig& cfg) {
  const long k = cfg.k.value_or(1);
  const long n1 = cfg.n.value_or(128), n2 = 2 * n1;
  const double tol = cfg.tol.value_or(1e-8);
  CircleFunction f = [k](double t) { return std::polar(1.0, double(k) * t); };
  ExperimentResult r;
  IndexReport idx = fredholm_index(f, n1, n2, tol);
  long w = winding_number(f);
  r.report = {{"symbol", "e^{i" + std::to_string(k) + "theta}"},
              {"N", {n1, n2}},
              {"index", idx.index},
              {"winding", w},
              {"agree", idx.index == -w}};
  std::ostringstream csv;
  csv << "n,sigma,sigma_adjoint\n";
  const auto& s = idx.fine.singular_values;
  const auto& sa = idx.fine.adjoint_singular_values;
  for (std::size_t i = 0; i < std::max(s.size(), sa.size()); ++i)
    csv << i << "," << (i < s.size() ? detail::fmt(s[i]) : "") << "," << (i < sa.size() ? detail::fmt(sa[i]) : "")
        << "\n";
  r.files.push_back({"circle-index_singular_values.csv", csv.str()});
  r.pass = idx.index == -w && idx.index == -k;
  return r;
}

inline ExperimentResult run_cr_symbol(const ExperimentConfig& cfg) {
  const long n = cfg.n.value_or(32);
  const double tol = cfg.tol.value_or(1e-8);
  ExperimentResult r;
  Json rows = Json::array();
  bool ok = true;
  for (int tau : {1, -1}) {
    CrSymbolReport s = cr_boundary_symbol(tau, n, tol);
    rows.push_back({{"tau", tau},
                    {"kernel_dim", s.kernel_dim},
                    {"kernel_gap_to_l0", s.kernel_gap_to_l0},
                    {"surjective", s.surjective},
                    {"trace_of_kernel", {s.trace_of_kernel.real(), s.trace_of_kernel.imag()}},
                    {"phase", s.phase}});
    if (tau == 1) ok = ok && s.kernel_dim == 1 && s.kernel_gap_to_l0 <= 1e-12 && std::abs(s.trace_of_kernel) > 0.5;
    else ok = ok && s.kernel_dim == 0;
    ok = ok && s.surjective;
  }
  r.report = {{"N", n}, {"cases", rows}};
  r.pass = ok;
  return r;
}

struct ScanSummary {
  long far_points = 0, far_failures = 0, skew_points = 0, skew_failures = 0, top_failures = 0, marginal = 0;
  bool pass() const { return far_failures == 0 && skew_failures == 0 && top_failures == 0 && skew_points > 0; }
};

inline ScanSummary summarize(const ScanReport& rep) {
  ScanSummary s;
  for (const ScanPoint& p : rep.results) {
    if (p.marginal) ++s.marginal;
    if (p.dims[2] != 0) ++s.top_failures;
    if (p.skew_distance >= 0.3) {
      ++s.far_points;
      if (p.dims != std::vector<Index>{0, 0, 0}) ++s.far_failures;
    }
    if (p.skew_distance <= 1e-12) {
      ++s.skew_points;
      if (p.dims != std::vector<Index>{1, 1, 0}) ++s.skew_failures;
    }
  }
  return s;
}

inline ExperimentResult run_dolbeault_scan(const ExperimentConfig& cfg) {
  Rng rng(*cfg.seed);
  const long n = cfg.n.value_or(32), grid = cfg.grid.value_or(1000);
  const double tol = cfg.tol.value_or(1e-8);
  ScanReport rep = exactness_scan(scan_grid(rng, static_cast<std::size_t>(grid)), n, tol);
  ScanSummary s = summarize(rep);
  ExperimentResult r;
  long classes[4] = {0, 0, 0, 0};
  for (const auto& p : rep.results) ++classes[static_cast<int>(p.cls)];
  r.report = {{"N", n},
              {"grid", grid},
              {"tol", tol},
              {"skew_radius", rep.skew_radius},
              {"far_points", s.far_points},
              {"far_failures", s.far_failures},
              {"skew_points", s.skew_points},
              {"skew_failures", s.skew_failures},
              {"top_failures", s.top_failures},
              {"marginal", s.marginal},
              {"classes",
               {{"exact", classes[0]}, {"skew-diagonal", classes[1]}, {"marginal", classes[2]}, {"other", classes[3]}}}};
  std::ostringstream csv;
  csv << "point_id,z1_re,z1_im,z2_re,z2_im,xi1_re,xi1_im,xi2_re,xi2_im,skew_distance,h0,h1,h2,marginal,class\n";
  for (std::size_t i = 0; i < rep.points.size(); ++i) {
    const auto& p = rep.points[i];
    const auto& q = rep.results[i];
    csv << i;
    for (const cplx& v : {p.z(0), p.z(1), p.xi(0), p.xi(1)}) csv << "," << detail::fmt(v.real()) << "," << detail::fmt(v.imag());
    csv << "," << detail::fmt(q.skew_distance) << "," << q.dims[0] << "," << q.dims[1] << "," << q.dims[2] << ","
        << (q.marginal ? 1 : 0) << "," << to_string(q.cls) << "\n";
  }
  r.files.push_back({"dolbeault-scan.csv", csv.str()});
  r.pass = s.pass();
  return r;
}

inline ExperimentResult run_bott(const ExperimentConfig& cfg) {
  const long grid = cfg.grid.value_or(512), n = cfg.n.value_or(32);
  ClutchingReport c = kernel_bundle_clutching(grid, n);
  ExperimentResult r;
  r.report = {{"winding", c.winding},
              {"max_section_gap", c.max_section_gap},
              {"max_closed_form_gap", c.max_closed_form_gap},
              {"transition_defect", c.transition_defect},
              {"orientation", c.orientation},
              {"equator_grid", grid},
              {"N", n},
              {"fibers", c.fibers},
              {"verdict", index_element_verdict(c.winding)}};
  std::ostringstream csv;
  csv << "angle,transition_phase\n";
  std::vector<double> phase;
  for (std::size_t i = 0; i < c.angles.size(); ++i) {
    phase.push_back(std::arg(c.transition[i]));
    csv << detail::fmt(c.angles[i]) << "," << detail::fmt(phase.back()) << "\n";
  }
  r.files.push_back({"bott_transition.csv", csv.str()});
  r.files.push_back({"bott_transition.svg", line_plot_svg(c.angles, phase, "transition phase vs equator angle")});
  r.pass = c.winding == 1 && c.max_section_gap <= 0.05 && c.max_closed_form_gap <= 1e-6;
  return r;
}

struct ComplementCheck {
  bool exact_above_zero = true;
  bool euler = true;
  double projection_defect = 0.0;  // idempotence, self-adjointness, A pi
};

inline ComplementCheck check_complement(const ComplementResult& res) {
  ComplementCheck c;
  c.euler = res.report.euler_conserved;
  for (const auto& dims : res.augmented_cohomology)
    for (std::size_t j = 1; j < dims.size(); ++j) c.exact_above_zero = c.exact_above_zero && dims[j] == 0;
  for (std::size_t f = 0; f < res.projections.size(); ++f)
    for (std::size_t j = 0; j < res.projections[f].size(); ++j) {
      const Matrix& p = res.projections[f][j];
      if (p.size() == 0) continue;
      const Matrix& a = res.augmented.fibers[f].differentials[j];
      c.projection_defect = std::max({c.projection_defect, opnorm(p * p - p), opnorm(p - p.adjoint()),
                                      a.size() ? opnorm(a * p) / (1.0 + opnorm(a)) : 0.0});
    }
  return c;
}

inline ExperimentResult run_complement(const ExperimentConfig& cfg) {
  Rng rng(*cfg.seed);
  const long trials = 50;
  long exact_failures = 0, euler_failures = 0, discontinuous = 0;
  double worst_proj = 0.0;
  for (long i = 0; i < trials; ++i) {
    ComplementResult res = complement_family(random_family(rng));
    ComplementCheck c = check_complement(res);
    if (!c.exact_above_zero) ++exact_failures;
    if (!c.euler) ++euler_failures;
    if (res.discontinuous_fill) ++discontinuous;
    worst_proj = std::max(worst_proj, c.projection_defect);
  }
  // Dolbeault fibers truncated to finite dimension, on points approaching the skew diagonal
  const long n = cfg.n.value_or(16), grid = cfg.grid.value_or(64);
  std::vector<CospherePoint> pts;
  Eigen::Vector2cd xi = random_unit2(rng);
  for (long i = 0; i < grid; ++i) {
    double s = -1.0 + 2.0 * double(i) / double(std::max<long>(1, grid - 1));
    pts.push_back(CospherePoint::from_parameters(xi, s, 0.0));
  }
  ComplementResult dol = complement_family(dolbeault_family(pts, n));
  ComplementCheck dc = check_complement(dol);
  ExperimentResult r;
  r.report = {{"trials", trials},
              {"exact_failures", exact_failures},
              {"euler_failures", euler_failures},
              {"discontinuous_fill_warnings", discontinuous},
              {"max_projection_defect", worst_proj},
              {"dolbeault",
               {{"N", n},
                {"grid", grid},
                {"fill_ranks", dol.report.fill_ranks},
                {"j0_dims", dol.report.j0_dims},
                {"exact_above_zero", dc.exact_above_zero},
                {"euler_conserved", dc.euler},
                {"discontinuous_fill", dol.discontinuous_fill}}}};
  r.pass = exact_failures == 0 && euler_failures == 0 && worst_proj <= 1e-10 && dc.exact_above_zero && dc.euler;
  return r;
}

namespace detail {

inline std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace detail

/** Parses a JSON experiment config; errors carry `source` and a line/column position. */
inline ExperimentConfig parse_config_text(const std::string& text, const std::string& source) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error("config", source + ": " + detail::line_col(text, e.byte) + ": " + e.what());
  }
  if (!j.is_object()) throw Error("config", source + ": top level must be an object");
  ExperimentConfig cfg;
  auto want = [&](const std::string& key, bool ok, const char* type) {
    if (!ok) throw Error("config", source + ": key '" + key + "' must be " + type);
  };
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    const Json& v = it.value();
    if (key == "experiment") {
      want(key, v.is_string(), "a string");
      cfg.name = v.get<std::string>();
    } else if (key == "N" || key == "grid" || key == "k") {
      want(key, v.is_number_integer(), "an integer");
      (key == "N" ? cfg.n : key == "grid" ? cfg.grid : cfg.k) = v.get<long>();
    } else if (key == "tol") {
      want(key, v.is_number(), "a number");
      cfg.tol = v.get<double>();
    } else if (key == "seed") {
      want(key, v.is_number_unsigned(), "a nonnegative integer");
      cfg.seed = v.get<std::uint64_t>();
    } else if (key == "surface" || key == "out") {
      want(key, v.is_string(), "a string");
      if (key == "surface") cfg.surface = v.get<std::string>();
      else cfg.out_dir = v.get<std::string>();
    } else {
      throw Error("config", source + ": unknown key '" + key + "'");
    }
  }
  if (cfg.name.empty()) throw Error("config", source + ": missing key 'experiment'");
  return cfg;
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  static const std::vector<std::pair<std::string, std::function<ExperimentResult(const ExperimentConfig&)>>> table = {
      {"derham", run_derham},           {"counterexample", run_counterexample},
      {"cone-props", run_cone_props},   {"hodge", run_hodge},
      {"lift", run_lift},               {"quasilift", run_quasilift},
      {"circle-index", run_circle_index}, {"cr-symbol", run_cr_symbol},
      {"dolbeault-scan", run_dolbeault_scan}, {"bott", run_bott},
      {"complement", run_complement}};
  const CatalogEntry* entry = find_experiment(cfg.name);
  if (!entry) throw Error("config", "unknown experiment '" + cfg.name + "'");
  if (entry->randomized && !cfg.seed) throw Error("config", "experiment '" + cfg.name + "' needs a seed");
  if (cfg.tol && !(*cfg.tol > 0.0)) throw Error("config", "tol must be positive");
  if (cfg.n && *cfg.n < 1) throw Error("config", "N must be positive");
  if (cfg.grid && *cfg.grid < 1) throw Error("config", "grid must be positive");
  for (const auto& [name, fn] : table)
    if (name == cfg.name) {
      ExperimentResult r = fn(cfg);
      r.report["experiment"] = cfg.name;
      r.report["anchor"] = entry->anchor;
      r.report["pass"] = r.pass;
      if (cfg.seed) r.report["seed"] = *cfg.seed;
      return r;
    }
  throw Error("config", "experiment '" + cfg.name + "' has no runner");
}

}  // namespace fcl
