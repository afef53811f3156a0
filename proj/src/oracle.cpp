#include "sflow/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sflow {

namespace {

Matrix shooting_matrix(const Matrix& u0, const Matrix& u1, double lambda) {
  // Bperp(u1)* exp(-lambda I) B(u0) with the exact interval propagator;
  // factors only through frames, never through a diagonalization of u.
  const Complex up = std::exp(Complex(0.0, lambda));
  const Complex dn = std::exp(Complex(0.0, -lambda));
  return 0.5 * (up * u0 - dn * u1);
}

double sigma_min_at(const Matrix& u0, const Matrix& u1, double lambda) {
  Eigen::JacobiSVD<Matrix> svd(shooting_matrix(u0, u1, lambda));
  return svd.singularValues().minCoeff();
}

}  // namespace

std::vector<double> shooting_spectrum(const Matrix& u0, const Matrix& u1,
                                      const ShootingConfig& cfg) {
  if (u0.rows() != u1.rows() || u0.rows() != u0.cols() || u1.rows() != u1.cols()) {
    fail(Errc::bad_input, "unitaries must be square and of equal size");
  }
  if (!(cfg.lo < cfg.hi)) fail(Errc::bad_input, "window must satisfy lo < hi");
  const int n = static_cast<int>(u0.rows());
  const double max_step = kPi / (4.0 * n);
  int resolution = cfg.resolution;
  if (resolution <= 0) {
    resolution = static_cast<int>(std::ceil((cfg.hi - cfg.lo) / (max_step / 2.0))) + 1;
  }
  const double step = (cfg.hi - cfg.lo) / (resolution - 1);
  if (!(step < max_step)) fail(Errc::scan_too_coarse, "lambda resolution above pi/(4n)");

  std::vector<double> svals(resolution);
  for (int i = 0; i < resolution; ++i) {
    svals[i] = sigma_min_at(u0, u1, cfg.lo + step * i);
  }

  std::vector<double> dips;
  for (int i = 1; i + 1 < resolution; ++i) {
    // left-strict so a flat sampled plateau yields exactly one detection
    if (!(svals[i] < svals[i - 1] && svals[i] <= svals[i + 1])) continue;
    double a = cfg.lo + step * (i - 1);
    double b = cfg.lo + step * (i + 1);
    for (int it = 0; it < cfg.bisect_depth; ++it) {
      double m1 = a + (b - a) / 3.0;
      double m2 = b - (b - a) / 3.0;
      if (sigma_min_at(u0, u1, m1) < sigma_min_at(u0, u1, m2)) {
        b = m2;
      } else {
        a = m1;
      }
    }
    double lambda = (a + b) / 2.0;
    Eigen::JacobiSVD<Matrix> svd(shooting_matrix(u0, u1, lambda));
    double smin = svd.singularValues().minCoeff();
    if (smin >= cfg.dip_tol) continue;  // shallow avoided dip, not an eigenvalue
    int multiplicity = 0;
    for (Eigen::Index k = 0; k < svd.singularValues().size(); ++k) {
      if (svd.singularValues()(k) < cfg.dip_tol) ++multiplicity;
    }
    for (int k = 0; k < multiplicity; ++k) dips.push_back(lambda);
  }

  std::sort(dips.begin(), dips.end());
  for (std::size_t i = 0; i + 1 < dips.size(); ++i) {
    double gap = dips[i + 1] - dips[i];
    if (gap > 1e-9 && gap < 0.5 * step) {
      fail(Errc::scan_too_coarse, "adjacent dips unresolved at this resolution");
    }
  }
  return dips;
}

long long shooting_crossing_count(const std::vector<Matrix>& u0_path,
                                  const std::vector<Matrix>& u1_path, double window,
                                  const ShootingConfig& cfg_in) {
  if (u0_path.size() != u1_path.size() || u0_path.size() < 2) {
    fail(Errc::bad_input, "paths must have matching sample counts");
  }
  ShootingConfig cfg = cfg_in;
  cfg.lo = -window;
  cfg.hi = window;

  std::vector<std::vector<double>> dips(u0_path.size());
  for (std::size_t i = 0; i < u0_path.size(); ++i) {
    dips[i] = shooting_spectrum(u0_path[i], u1_path[i], cfg);
    for (double v : dips[i]) {
      if (std::abs(v) < 1e-8) {
        fail(Errc::unresolved_crossing, "shooting dip sits at zero at a sample");
      }
    }
  }

  long long net = 0;
  for (std::size_t i = 0; i + 1 < dips.size(); ++i) {
    for (double a : dips[i]) {
      // nearest continuation at the next sample
      double best = std::numeric_limits<double>::infinity();
      double b = 0.0;
      for (double cand : dips[i + 1]) {
        if (std::abs(cand - a) < best) {
          best = std::abs(cand - a);
          b = cand;
        }
      }
      if (best > kPi / 4.0) {
        if (std::abs(a) < window / 2.0) {
          fail(Errc::scan_too_coarse, "dip near zero lost between samples");
        }
        continue;  // drifted out near the window edge
      }
      if (a < 0 && b > 0) ++net;
      if (a > 0 && b < 0) --net;
    }
  }
  return net;
}

KZeroClass dense_crossing_oracle(const HermPath& p, int oversample, double gap_min) {
  PathValidity v = validate_path(p, gap_min);
  if (v.verdict != PathVerdict::valid) {
    fail(Errc::invalid_path, std::string("path verdict is ") + verdict_name(v.verdict));
  }
  if (oversample < 1) oversample = 1;

  KZeroClass out = KZeroClass::zero(p.shape);
  for (int b = 0; b < p.shape.block_count(); ++b) {
    long long value = 0;
    for (int th = 0; th < p.shape.theta_count(b); ++th) {
      // negative-count walk over the oversampled grid; no curve matching
      auto minus_count = [&](const Matrix& m) -> long long {
        SpectralSignature sig = signature(m);
        if (sig.n_zero > 0) return -1;  // caller nudges
        return sig.n_minus;
      };
      long long net = 0;
      long long prev_minus = minus_count(p.samples.front().at(b, th));
      if (prev_minus < 0) fail(Errc::invalid_path, "singular start sample");
      for (int i = 0; i + 1 < p.sample_count(); ++i) {
        const Matrix& a = p.samples[i].at(b, th);
        const Matrix& c = p.samples[i + 1].at(b, th);
        for (int k = 1; k <= oversample; ++k) {
          double s = static_cast<double>(k) / oversample;
          Matrix m = (1.0 - s) * a + s * c;
          long long cur = minus_count(m);
          if (cur < 0) {
            // a grid point pinned at zero is skipped; the net count only
            // needs clean evaluation points, and the path endpoints are
            // clean by validation
            if (i + 2 == p.sample_count() && k == oversample) {
              fail(Errc::unresolved_crossing, "validated endpoint became singular");
            }
            continue;
          }
          net += prev_minus - cur;
          prev_minus = cur;
        }
      }
      if (th == 0) {
        value = net;
      } else if (net != value) {
        fail(Errc::theta_inconsistent, "oracle crossing count varies with theta");
      }
    }
    out.components[b] = value;
  }
  return out;
}

SignRecord pin_sign_constants() {
  SignRecord rec{0, 0, 0, 0, 0};

  // sigma_e: axiom (V) fixture 2tP - 1 with a rank-one P.
  {
    AlgebraShape shape = AlgebraShape::scalar(2);
    AElement p = AElement::zero(shape, 1);
    p.at(0, 0)(0, 0) = 1.0;
    AElement one = AElement::identity(shape, 1);
    HermPath path = HermPath::linear(-1.0 * one, 2.0 * p - one, 33);
    std::vector<long long> raw = winding_route_raw(path);
    if (std::abs(raw[0]) != 1) fail(Errc::inconsistent_conventions, "axiom V winding not +-1");
    rec.sigma_e = static_cast<int>(raw[0]);
    FlowResult crossings = spectral_flow_crossings(path);
    FlowResult sections = spectral_flow_sections(path);
    if (crossings.value.components[0] != 1 || sections.value.components[0] != 1) {
      fail(Errc::inconsistent_conventions, "crossing/section routes break axiom V");
    }
  }

  // sigma_d: single shooting dip of the pair (1, i) inside (0, pi).
  {
    Matrix u0 = Matrix::Identity(1, 1);
    Matrix u1 = Matrix::Identity(1, 1);
    u1(0, 0) = Complex(0.0, 1.0);
    ShootingConfig cfg;
    cfg.lo = 0.2;
    cfg.hi = kPi - 0.2;
    std::vector<double> dips = shooting_spectrum(u0, u1, cfg);
    if (dips.size() != 1) fail(Errc::inconsistent_conventions, "expected a single dip");
    if (std::abs(dips[0] - kPi / 4.0) < 1e-6) {
      rec.sigma_d = +1;
    } else if (std::abs(dips[0] - 3.0 * kPi / 4.0) < 1e-6) {
      rec.sigma_d = -1;
    } else {
      fail(Errc::inconsistent_conventions, "dip off both branch conventions");
    }
  }

  // sigma_m: scalar fixture u1(t) = exp(i(pi + 2 pi t)) against the shooting
  // crossing count, and the closed-loop det identity.
  {
    AlgebraShape shape = AlgebraShape::scalar(1);
    const int samples = 64;  // keeps the crossing parameter off the grid
    LagrangianPath lp;
    lp.shape = shape;
    lp.rank = 1;
    std::vector<Matrix> u0_m, u1_m;
    for (int i = 0; i < samples; ++i) {
      double t = static_cast<double>(i) / (samples - 1);
      AElement a = AElement::identity(shape, 1);
      AElement bm = AElement::identity(shape, 1);
      bm.at(0, 0)(0, 0) = std::exp(Complex(0.0, kPi + 2.0 * kPi * t));
      lp.t_grid.push_back(t);
      lp.u0.push_back(a);
      lp.u1.push_back(bm);
      u0_m.push_back(Matrix::Identity(1, 1));
      u1_m.push_back(bm.at(0, 0));
    }
    lp.t_grid.front() = 0.0;
    lp.t_grid.back() = 1.0;
    // The fixture is closed in t, so maslov_pair_raw also asserts the det
    // winding identity for the loop case.
    std::vector<long long> raw = maslov_pair_raw(lp);
    long long oracle = shooting_crossing_count(u0_m, u1_m, 2.0);
    if (std::abs(raw[0]) != 1 || std::abs(oracle) != 1) {
      fail(Errc::inconsistent_conventions, "Maslov fixture counts not +-1");
    }
    rec.sigma_m = static_cast<int>(oracle / raw[0]);
    // raw equals the det winding of u1 u0* (checked inside maslov_pair_raw),
    // so the loop identity mu = beta[u1 u0*] forces sigma_m = +1.
    if (rec.sigma_m != 1) {
      fail(Errc::inconsistent_conventions,
           "oracle crossing count conflicts with the loop identity");
    }
  }

  // sigma_s: 1x1 suspension of 2t - 1.
  {
    AlgebraShape shape = AlgebraShape::scalar(1);
    AElement one = AElement::identity(shape, 1);
    HermPath path = HermPath::linear(-1.0 * one, one, 65);
    std::vector<long long> raw = suspension_boundary_winding_raw(path);
    FlowResult flow = spectral_flow(path);
    if (std::abs(raw[0]) != 1 || flow.value.components[0] != 1) {
      fail(Errc::inconsistent_conventions, "suspension fixture winding not +-1");
    }
    rec.sigma_s = static_cast<int>(flow.value.components[0] / raw[0]);
  }

  // sigma_c: graded fixture W_t = (1 - t) + t exp(i theta), odd flow one.
  {
    AlgebraShape shape = AlgebraShape::loop(1, 16);
    GradedHermPath g;
    g.half = 1;
    g.path.shape = shape;
    g.path.rank = 2;
    const int samples = 33;
    for (int i = 0; i < samples; ++i) {
      double t = static_cast<double>(i) / (samples - 1);
      AElement s = AElement::zero(shape, 2);
      for (int th = 0; th < 16; ++th) {
        double theta = 2.0 * kPi * th / 16;
        Complex w = (1.0 - t) + t * std::exp(Complex(0.0, theta));
        s.at(0, th)(0, 1) = std::conj(w);
        s.at(0, th)(1, 0) = w;
      }
      g.path.t_grid.push_back(t);
      g.path.samples.push_back(std::move(s));
    }
    g.path.t_grid.front() = 0.0;
    g.path.t_grid.back() = 1.0;
    KOneClass odd = odd_spectral_flow(g);
    std::vector<std::pair<long long, long long>> chern = suspension_chern_raw(g);
    long long diff = chern[0].first - chern[0].second;
    if (odd.components[0] != 1 || std::abs(diff) != 1) {
      fail(Errc::inconsistent_conventions, "suspension Chern fixture not +-1");
    }
    rec.sigma_c = static_cast<int>(odd.components[0] / diff);

    // unit-flux fixture pinning the plaquette orientation itself
    const int n_theta = 24, n_x = 24;
    ProjectionCylinder pc;
    pc.p.assign(n_x + 1, std::vector<Matrix>(n_theta));
    for (int l = 0; l <= n_x; ++l) {
      double x = static_cast<double>(l) / n_x;
      for (int th = 0; th < n_theta; ++th) {
        double theta = 2.0 * kPi * th / n_theta;
        Eigen::Vector2cd psi;
        psi << std::cos(kPi * x / 2.0),
            std::sin(kPi * x / 2.0) * std::exp(Complex(0.0, theta));
        pc.p[l][th] = psi * psi.adjoint();
      }
    }
    Matrix bottom(2, 1), top(2, 1);
    bottom << 1.0, 0.0;
    top << 0.0, 1.0;
    pc.frame_bottom.assign(n_theta, bottom);
    pc.frame_top.assign(n_theta, top);
    if (bott_beta_cylinder(pc) != 1) {
      fail(Errc::inconsistent_conventions, "unit flux fixture must evaluate to +1");
    }
  }

  if (!(rec == kFrozenSigns)) {
    fail(Errc::inconsistent_conventions, "measured record differs from the frozen one");
  }
  return rec;
}

}  // namespace sflow
