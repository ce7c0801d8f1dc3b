// Acceptance checks. Usage: acceptance <1..9|all> [path-to-tqd-cli]
// Prints one PASS/FAIL line per criterion; exit status is nonzero if any fail.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "tqd/curves.hpp"
#include "tqd/fitting.hpp"

using namespace tqd;

namespace {

const DotSigmas ref_sigmas{0.5, 1.0, 1.5};
std::string cli_path;

ExperimentSpec make_spec(double j, std::vector<double> times = {0.0},
                         DotPair prepared = DotPair::p12) {
  ExperimentSpec s;
  s.prepared = prepared;
  s.pulsed = prepared == DotPair::p12 ? DotPair::p23 : DotPair::p12;
  s.j = j;
  s.times = std::move(times);
  return s;
}

std::vector<double> grid(double t_max, int n) {
  std::vector<double> t(n);
  for (int i = 0; i < n; ++i)
    t[i] = t_max * i / (n - 1);
  return t;
}

bool report(int n, bool pass, const std::string &what) {
  std::printf("AC%d %s: %s\n", n, pass ? "PASS" : "FAIL", what.c_str());
  std::fflush(stdout);
  return pass;
}

std::string fmt(const char *f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

bool ac1() {
  std::mt19937_64 rng(20260101);
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const FieldSample f{n(rng), n(rng), n(rng)};
    const double j = 20.0 * u(rng), t = 20.0 * u(rng);
    const auto spec = make_spec(j, {0.0}, u(rng) < 0.5 ? DotPair::p12 : DotPair::p23);
    worst = std::max(worst, std::abs(p0_single(spec, f, t, Representation::full8) -
                                     p0_single(spec, f, t, Representation::su3)));
  }
  return report(1, worst <= 1e-9,
                fmt("8-dim vs SU(3) single-shot P0, 1000 draws, max |diff| = %.3e (tol 1e-9)", worst));
}

bool ac2() {
  const auto times = grid(10.0, 400);
  bool pass = true;
  std::string detail;
  for (double j : {0.5, 3.0, 10.0}) {
    const auto spec = make_spec(j, times);
    CurveOptions opt;
    opt.n_samples = 200000;
    opt.seed = 20260101;
    const Curve mc = make_curve(Method::mc8, ref_sigmas, spec, opt);
    const Curve ex = make_curve(Method::quadrature, ref_sigmas, spec, opt);
    int bad = 0;
    double max_z = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      const double d = std::abs(mc.values[i] - ex.values[i]);
      if (d > 3.0 * mc.stderr_[i] + 1e-9)
        ++bad;
      if (mc.stderr_[i] > 0.0)
        max_z = std::max(max_z, d / mc.stderr_[i]);
    }
    pass = pass && bad == 0;
    detail += fmt(" J=%g: %d/400 outside 3se (max z %.2f);", j, bad, max_z);
  }
  return report(2, pass, "exact vs MC (N=2e5), sigmas (0.5,1,1.5):" + detail);
}

bool ac3() {
  double worst = 0.0;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  std::vector<DotSigmas> sets{ref_sigmas};
  for (int i = 0; i < 5; ++i)
    sets.push_back({u(rng), u(rng), u(rng)});
  for (const auto &s : sets) {
    const double s12sq = s.s1 * s.s1 + s.s2 * s.s2;
    for (double t : grid(10.0, 201))
      worst = std::max(worst, std::abs(p0_exact(s, make_spec(0.0), t) -
                                       0.5 * (1.0 + std::exp(-0.5 * s12sq * t * t))));
  }
  return report(3, worst <= 1e-6,
                fmt("J=0 exact vs (1+exp(-(s12 t)^2/2))/2, 6 sigma sets, max |diff| = %.3e (tol 1e-6)",
                    worst));
}

bool ac4() {
  const PairStats st = experiment_stats(ref_sigmas, make_spec(1.0));
  const double j = 50.0 * st.sigma_pair, sbar = st.sigma_bar;
  // 30 points per period over [0, 5/sbar]
  const int n = static_cast<int>(5.0 / sbar * j / (2.0 * std::numbers::pi) * 30.0);
  const auto times = grid(5.0 / sbar, n);
  const auto spec = make_spec(j, times);
  double dev = 0.0;
  Trace tr;
  for (double t : times) {
    const double e = p0_exact(ref_sigmas, spec, t);
    dev = std::max(dev, std::abs(e - p0_inf_j(ref_sigmas, spec, t)));
    tr.times.push_back(t);
    tr.values.push_back(e);
  }
  const FitResult fit = fit_rabi(tr, j);
  const double t2 = std::sqrt(2.0) / fit.get("sigma_bar"), t2_ref = std::sqrt(2.0) / sbar;
  const double t2_err = std::abs(t2 / t2_ref - 1.0);

  // large-t window: Gaussian term below 1e-9, fit offset + amplitude cos(Jt)
  const double t0 = 7.0 / sbar, t1 = 9.0 / sbar;
  Trace late;
  for (double t : grid(t1 - t0, 600)) {
    late.times.push_back(t0 + t);
    late.values.push_back(p0_exact(ref_sigmas, spec, t0 + t));
  }
  Eigen::MatrixXd a(late.times.size(), 3);
  Eigen::VectorXd b(late.times.size());
  for (std::size_t i = 0; i < late.times.size(); ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = std::cos(j * late.times[i]);
    a(i, 2) = std::sin(j * late.times[i]);
    b(i) = late.values[i];
  }
  const Eigen::Vector3d c = a.colPivHouseholderQr().solve(b);
  const double offset = c(0), amp = std::hypot(c(1), c(2));
  const bool pass = dev <= 0.02 && fit.converged && t2_err <= 0.03 &&
                    std::abs(offset - 0.375) <= 0.01 && std::abs(amp - 0.125) <= 0.01;
  return report(4, pass,
                fmt("J=50 s23: max|exact-inf_j| = %.4f (tol 0.02); fitted T2* = %.4f vs sqrt2/sbar = "
                    "%.4f (rel err %.2f%%, tol 3%%); late offset %.4f (3/8 +- 0.01), amplitude %.4f "
                    "(1/8 +- 0.01)",
                    dev, t2, t2_ref, 100.0 * t2_err, offset, amp));
}

bool ac5() {
  const PairStats st = experiment_stats(ref_sigmas, make_spec(1.0));
  auto max_dev = [&](double y) {
    const auto spec = make_spec(y * st.sigma_pair);
    double d = 0.0;
    for (double t : grid(6.0 / st.sigma_pair, 601))
      d = std::max(d, std::abs(p0_low_j(ref_sigmas, spec, t) - p0_exact(ref_sigmas, spec, t)));
    return d;
  };
  const double d2 = max_dev(0.2), d4 = max_dev(0.4), ratio = d4 / d2;
  const bool magnitude = d2 <= 0.02, scaling = ratio >= 2.5 && ratio <= 6.0;
  return report(5, magnitude && scaling,
                fmt("low_j vs exact over [0, 6/s23]: dev(0.2 s23) = %.4f (tol 0.02, %s); "
                    "dev(0.4)/dev(0.2) = %.2f (want [2.5, 6], %s)",
                    d2, magnitude ? "ok" : "over", ratio, scaling ? "ok" : "out of range"));
}

bool ac6() {
  double worst = 0.0;
  for (int a = 1; a <= 8; ++a)
    for (int b = 1; b <= 8; ++b)
      worst = std::max(worst, std::abs((gell_mann(a) * gell_mann(b)).trace() - cd(a == b ? 2.0 : 0.0)));
  const double tr_err = worst;
  const double comm7 = (gell_mann(7) * exchange12() - exchange12() * gell_mann(7)).cwiseAbs().maxCoeff();
  const Mat3C u = u2(angles::phi);
  const double rot = (u.adjoint() * exchange23() * u - exchange12()).cwiseAbs().maxCoeff();

  std::mt19937_64 rng(6);
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> uj(0.0, 5.0), us(0.0, 3.0);
  double diag = 0.0;
  for (int i = 0; i < 100; ++i) {
    const FieldSample f{n(rng), n(rng), n(rng)};
    const double jn = uj(rng);
    const Mat3C h = project_su3(build_hamiltonian(f, 0.0, jn), Gauge::up).traceless;
    const auto d = deltas(f, DotPair::p23);
    const PulsedFrame fr = diagonalize_pulsed(jn, d.delta, d.delta_bar);
    Mat3C r = fr.unitary.adjoint() * h * fr.unitary;
    for (int k = 0; k < 3; ++k)
      r(k, k) -= fr.eigen(k);
    diag = std::max(diag, r.cwiseAbs().maxCoeff());
  }
  double cs = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const DotSigmas s{us(rng), us(rng), us(rng)};
    for (DotPair p : {DotPair::p12, DotPair::p23}) {
      const PairStats st = pair_stats(s, p);
      cs = std::min(cs, st.sigma_pair * st.sigma_pair * st.sigma_bar * st.sigma_bar - st.cov * st.cov);
    }
  }
  const bool pass = tr_err <= 1e-14 && comm7 <= 1e-14 && rot <= 1e-14 && diag <= 1e-11 && cs >= -1e-12;
  return report(6, pass,
                fmt("tr(la lb)-2d_ab %.1e; |[l7,E12]| %.1e; |U2^dag E23 U2 - E12| %.1e; "
                    "diagonalization residual over 100 draws %.1e (tol 1e-11); min Cauchy-Schwarz "
                    "gap %.1e",
                    tr_err, comm7, rot, diag, cs));
}

bool ac7() {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> u(0.0, 10.0);
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    const FieldSample f{n(rng), n(rng), n(rng)};
    ExperimentSpec up = make_spec(u(rng), {0.0}, i % 2 ? DotPair::p12 : DotPair::p23);
    ExperimentSpec down = up;
    up.gauge = GaugeMode::up;
    down.gauge = GaugeMode::down;
    const double t = u(rng);
    worst = std::max(worst, std::abs(p0_single(up, f, t, Representation::full8) -
                                     p0_single(down, -f, t, Representation::full8)));
  }
  bool bitwise = true;
  for (DotPair prep : {DotPair::p12, DotPair::p23}) {
    ExperimentSpec up = make_spec(2.5, grid(10.0, 101), prep);
    ExperimentSpec down = up;
    up.gauge = GaugeMode::up;
    down.gauge = GaugeMode::down;
    McOptions mirrored;
    mirrored.mirror_fields = true;
    const Curve a = p0_mc(up, ref_sigmas, 20000, 777);
    const Curve b = p0_mc(down, ref_sigmas, 20000, 777, mirrored);
    bitwise = bitwise && std::memcmp(a.values.data(), b.values.data(),
                                     a.values.size() * sizeof(double)) == 0;
  }
  return report(7, worst <= 1e-12 && bitwise,
                fmt("per-sample |P0up(B) - P0down(-B)| max %.2e (tol 1e-12); mirrored-seed "
                    "single-gauge MC curves bitwise equal: %s",
                    worst, bitwise ? "yes" : "no"));
}

bool ac8() {
  const PairStats st23 = experiment_stats(ref_sigmas, make_spec(1.0));
  int ok_deph = 0, ok_rabi = 0;
  for (unsigned seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(1000 + seed);
    std::normal_distribution<double> noise(0.0, 0.01);
    Trace d, r;
    const auto dspec = make_spec(0.0), rspec = make_spec(10.0);
    for (double t : grid(4.0, 200)) {
      d.times.push_back(t);
      d.values.push_back(p0_zero_j(ref_sigmas, dspec, t) + noise(rng));
    }
    for (double t : grid(6.0, 400)) {
      r.times.push_back(t);
      r.values.push_back(p0_inf_j(ref_sigmas, rspec, t) + noise(rng));
    }
    const FitResult fd = fit_dephasing(d), fr = fit_rabi(r);
    ok_deph += fd.converged && std::abs(fd.get("sigma") / std::sqrt(1.25) - 1.0) <= 0.03;
    ok_rabi += fr.converged && std::abs(fr.get("J") / 10.0 - 1.0) <= 1e-3 &&
               std::abs(fr.get("sigma_bar") / st23.sigma_bar - 1.0) <= 0.05;
  }
  const auto sol = solve_sigmas({{SigmaKind::sigma12, std::sqrt(1.25)},
                                 {SigmaKind::sigma23, std::sqrt(3.25)},
                                 {SigmaKind::sigma_bar23, std::sqrt(1.0625)}});
  const auto sig = sol.sigmas();
  const double sol_err = std::max({std::abs(sig[0] - 0.5), std::abs(sig[1] - 1.0), std::abs(sig[2] - 1.5)});
  const PartialSigma s3 = sigma3_sq_shortcut({SigmaKind::sigma12, std::sqrt(1.25)},
                                             {SigmaKind::sigma_bar12, std::sqrt(2.5625)});
  const bool pass = ok_deph >= 95 && ok_rabi >= 95 && sol_err <= 1e-12 && std::abs(s3.value - 2.25) <= 1e-12;
  return report(8, pass,
                fmt("dephasing sigma12 within 3%%: %d/100; rabi (J 0.1%%, sbar 5%%): %d/100; "
                    "solve_sigmas max err %.1e; sigma3^2 shortcut = %.15g",
                    ok_deph, ok_rabi, sol_err, s3.value));
}

std::string slurp(const std::string &path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

bool ac9() {
  if (cli_path.empty())
    return report(9, false, "path to the tqd CLI not given");
  const std::string dir = (std::filesystem::temp_directory_path() / "tqd_ac9_").string() +
                          std::to_string(std::random_device{}());
  std::filesystem::create_directories(dir);
  const std::string cfg = dir + "/config.json";
  {
    std::ofstream f(cfg);
    f << R"({"experiment": {"j": 3.0, "times": {"stop": 10, "count": 101}},
             "sigmas": [0.5, 1.0, 1.5], "methods": ["exact", "mc", "mc3", "inf_j"],
             "mc": {"n_samples": 30000, "seed": 4242}})";
  }
  std::vector<std::string> outputs;
  for (const char *w : {"1", "8", "1", "8"}) {
    const std::string out = dir + "/w" + w + "_" + std::to_string(outputs.size()) + ".csv";
    const std::string cmd = "\"" + cli_path + "\" curve --config " + cfg + " --workers " + w +
                            " --out " + out;
    if (std::system(cmd.c_str()) != 0)
      return report(9, false, "CLI invocation failed: " + cmd);
    outputs.push_back(slurp(out));
  }
  bool same = !outputs[0].empty();
  for (const auto &o : outputs)
    same = same && o == outputs[0];
  return report(9, same,
                fmt("4 curve runs (workers 1, 8, 1, 8), %zu bytes each: %s", outputs[0].size(),
                    same ? "byte-identical" : "outputs differ"));
}

} // namespace

int main(int argc, char **argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s <1..9|all> [path-to-tqd-cli]\n", argv[0]);
    return 2;
  }
  if (argc > 2)
    cli_path = argv[2];
  bool (*const checks[])() = {ac1, ac2, ac3, ac4, ac5, ac6, ac7, ac8, ac9};
  const std::string which = argv[1];
  bool all_pass = true;
  for (int i = 1; i <= 9; ++i) {
    if (which != "all" && which != std::to_string(i))
      continue;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      all_pass = checks[i - 1]() && all_pass;
    } catch (const std::exception &e) {
      all_pass = report(i, false, std::string("exception: ") + e.what()) && all_pass;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("    (%.1f s)\n", secs);
  }
  return all_pass ? 0 : 1;
}
