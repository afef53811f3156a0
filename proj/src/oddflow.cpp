#include "sflow/oddflow.hpp"

#include <algorithm>
#include <cmath>

namespace sflow {

namespace {

// Grading sigma = diag(1_h, -1_h) on a block of size 2h.
Matrix grading(int h) {
  Matrix s = Matrix::Identity(2 * h, 2 * h);
  s.bottomRightCorner(h, h) = -Matrix::Identity(h, h);
  return s;
}

double odd_defect(const Matrix& m) {
  const int h = static_cast<int>(m.rows()) / 2;
  Matrix s = grading(h);
  return (s * m + m * s).norm();
}

double min_singular_value(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues().minCoeff();
}

}  // namespace

void GradedHermPath::validate_structure(double tol) const {
  path.validate_structure();
  if (path.rank != 2 * half) fail(Errc::bad_input, "graded path rank must be 2 * half");
  for (const AElement& s : path.samples) {
    for (int b = 0; b < path.shape.block_count(); ++b) {
      for (int th = 0; th < path.shape.theta_count(b); ++th) {
        const Matrix& m = s.at(b, th);
        double t = tol < 0 ? tol_herm(m.norm()) * 10.0 : tol;
        if (odd_defect(m) > t) fail(Errc::not_odd, "sample does not anticommute with the grading");
      }
    }
  }
}

Matrix GradedHermPath::w_block(int sample, int block, int theta) const {
  const Matrix& m = path.samples[sample].at(block, theta);
  const int h = static_cast<int>(m.rows()) / 2;
  return m.bottomLeftCorner(h, h);
}

LagrangianProjection::LagrangianProjection(AElement p_in) : p(std::move(p_in)) {
  p.validate();
  if (p.rank % 2 != 0) fail(Errc::not_lagrangian, "projection rank must be even");
  half = p.rank / 2;
  u = AElement::zero(p.shape, half);
  for (int b = 0; b < p.shape.block_count(); ++b) {
    for (int th = 0; th < p.shape.theta_count(b); ++th) {
      const Matrix& m = p.at(b, th);
      const int h = static_cast<int>(m.rows()) / 2;
      if ((m * m - m).norm() > 100.0 * tol_herm(m.norm())) {
        fail(Errc::not_lagrangian, "not a projection");
      }
      Matrix involution = 2.0 * m - Matrix::Identity(2 * h, 2 * h);
      if (odd_defect(involution) > 1e-8 * (1.0 + m.norm())) {
        fail(Errc::not_lagrangian, "2P - 1 is not odd");
      }
      Matrix u_block = 2.0 * m.bottomLeftCorner(h, h);
      if ((u_block.adjoint() * u_block - Matrix::Identity(h, h)).norm() >
          tol_unitary() * 10.0 * (1.0 + u_block.norm())) {
        fail(Errc::not_lagrangian, "off-diagonal block is not unitary");
      }
      u.at(b, th) = u_block;
    }
  }
}

LagrangianProjection lagrangian_projection_from_unitary(const AElement& u) {
  AElement p = AElement::zero(u.shape, 2 * u.rank);
  for (int b = 0; b < u.shape.block_count(); ++b) {
    for (int th = 0; th < u.shape.theta_count(b); ++th) {
      const Matrix& ub = u.at(b, th);
      const int h = static_cast<int>(ub.rows());
      Matrix m(2 * h, 2 * h);
      m.topLeftCorner(h, h) = Matrix::Identity(h, h);
      m.bottomRightCorner(h, h) = Matrix::Identity(h, h);
      m.topRightCorner(h, h) = ub.adjoint();
      m.bottomLeftCorner(h, h) = ub;
      p.at(b, th) = m / 2.0;
    }
  }
  return LagrangianProjection(p);
}

KOneClass odd_rel_index(const LagrangianProjection& p, const LagrangianProjection& q,
                        double gap_min) {
  p.p.check_same_shape(q.p);
  std::vector<long long> components(p.p.shape.block_count(), 0);
  for (int b = 0; b < p.p.shape.block_count(); ++b) {
    if (p.p.shape.blocks[b].kind != BlockKind::loop) continue;
    std::vector<Matrix> loop;
    for (int th = 0; th < p.p.shape.theta_count(b); ++th) {
      loop.push_back(p.u.at(b, th) * q.u.at(b, th).adjoint());
    }
    components[b] = det_phase_winding(loop, /*wrap=*/true, gap_min);
  }
  return KOneClass(p.p.shape, std::move(components));
}

KOneClass odd_spectral_flow(const GradedHermPath& g, double gap_min) {
  g.validate_structure();
  const int last = g.path.sample_count() - 1;
  std::vector<long long> components(g.path.shape.block_count(), 0);
  for (int b = 0; b < g.path.shape.block_count(); ++b) {
    std::vector<Matrix> w_start, w_end;
    for (int th = 0; th < g.path.shape.theta_count(b); ++th) {
      Matrix w0 = g.w_block(0, b, th);
      Matrix w1 = g.w_block(last, b, th);
      if (min_singular_value(w0) < gap_min || min_singular_value(w1) < gap_min) {
        fail(Errc::singular_endpoint, "endpoint off-diagonal block is not invertible");
      }
      w_start.push_back(std::move(w0));
      w_end.push_back(std::move(w1));
    }
    if (g.path.shape.blocks[b].kind == BlockKind::loop) {
      components[b] = det_phase_winding(w_end, /*wrap=*/true, gap_min) -
                      det_phase_winding(w_start, /*wrap=*/true, gap_min);
    }
  }
  return KOneClass(g.path.shape, std::move(components));
}

namespace {

// Accumulated det phase along an analytic curve of invertible matrices,
// with adaptive parameter refinement of oversized steps.
double curve_det_phase(const std::function<Matrix(double)>& at, int initial_samples,
                       int refine_max, double gap_min) {
  struct Rec {
    const std::function<Matrix(double)>& at;
    int refine_max;
    double gap_min;

    double step(double sa, double sb, const Complex& da, const Complex& db, int depth) const {
      double delta = std::arg(db / da);
      if (std::abs(delta) < kPhaseStepMax) return delta;
      if (depth >= refine_max) {
        fail(Errc::sampling_too_coarse, "boundary phase step stuck above pi/2");
      }
      double sm = (sa + sb) / 2.0;
      Matrix m = at(sm);
      if (min_singular_value(m) < gap_min) {
        fail(Errc::singular_sample, "boundary sample is singular");
      }
      Complex dm = m.determinant();
      return step(sa, sm, da, dm, depth + 1) + step(sm, sb, dm, db, depth + 1);
    }
  } rec{at, refine_max, gap_min};

  double phase = 0.0;
  double s_prev = 0.0;
  Matrix m_prev = at(0.0);
  if (min_singular_value(m_prev) < gap_min) fail(Errc::singular_sample, "singular corner");
  Complex d_prev = m_prev.determinant();
  for (int i = 1; i < initial_samples; ++i) {
    double s = static_cast<double>(i) / (initial_samples - 1);
    Matrix m = at(s);
    if (min_singular_value(m) < gap_min) fail(Errc::singular_sample, "singular boundary sample");
    Complex d = m.determinant();
    phase += rec.step(s_prev, s, d_prev, d, 0);
    s_prev = s;
    d_prev = d;
  }
  return phase;
}

Matrix interp_sample(const HermPath& p, int block, double t) {
  // piecewise-linear interpolation of the sampled path
  const auto& grid = p.t_grid;
  auto it = std::upper_bound(grid.begin(), grid.end(), t);
  int hi = std::clamp(static_cast<int>(it - grid.begin()), 1, p.sample_count() - 1);
  int lo = hi - 1;
  double w = (t - grid[lo]) / (grid[hi] - grid[lo]);
  return (1.0 - w) * p.samples[lo].at(block, 0) + w * p.samples[hi].at(block, 0);
}

}  // namespace

std::vector<long long> suspension_boundary_winding_raw(const HermPath& p, int x_samples,
                                                       const FlowParams& params) {
  p.validate_structure();
  for (const BlockSpec& b : p.shape.blocks) {
    if (b.kind != BlockKind::scalar) {
      fail(Errc::bad_input, "even-to-odd suspension runs over scalar blocks");
    }
  }
  std::vector<long long> out;
  for (int b = 0; b < p.shape.block_count(); ++b) {
    const int d = p.shape.block_matrix_dim(b, p.rank);
    const Matrix id = Matrix::Identity(d, d);
    const Complex i1(0.0, 1.0);
    const Matrix d0 = p.samples.front().at(b, 0);
    const Matrix d1 = p.samples.back().at(b, 0);

    // Counterclockwise boundary of [0,1]^2 in (t, x).
    auto edge_x0 = [&](double s) -> Matrix { return interp_sample(p, b, s) - i1 * id; };
    auto edge_t1 = [&](double s) -> Matrix { return d1 - i1 * std::cos(kPi * s) * id; };
    auto edge_x1 = [&](double s) -> Matrix { return interp_sample(p, b, 1.0 - s) + i1 * id; };
    auto edge_t0 = [&](double s) -> Matrix { return d0 - i1 * std::cos(kPi * (1.0 - s)) * id; };

    const int nt = std::max(p.sample_count(), 3);
    const int nx = std::max(x_samples, 3);
    double phase = curve_det_phase(edge_x0, nt, params.refine_max, 1e-12) +
                   curve_det_phase(edge_t1, nx, params.refine_max, 1e-12) +
                   curve_det_phase(edge_x1, nt, params.refine_max, 1e-12) +
                   curve_det_phase(edge_t0, nx, params.refine_max, 1e-12);
    double w = phase / (2.0 * kPi);
    long long winding = std::llround(w);
    if (std::abs(w - static_cast<double>(winding)) > 1e-6) {
      fail(Errc::sampling_too_coarse, "boundary winding not integral");
    }
    out.push_back(winding);
  }
  return out;
}

SuspendEvenOddReport suspend_even_to_odd(const HermPath& p, int x_samples,
                                         const FlowParams& params) {
  SuspendEvenOddReport rep{spectral_flow(p, params).value,
                           suspension_boundary_winding_raw(p, x_samples, params), false};
  for (int b = 0; b < p.shape.block_count(); ++b) {
    if (kFrozenSigns.sigma_s * rep.boundary_winding[b] != rep.flow.components[b]) {
      fail(Errc::cross_check_failed, "suspension winding disagrees with the spectral flow");
    }
  }
  rep.consistent = true;
  return rep;
}

long long bott_beta_cylinder(const ProjectionCylinder& pc) {
  const int rows = static_cast<int>(pc.p.size());
  if (rows < 2) fail(Errc::bad_input, "cylinder needs at least two rows");
  const int n_theta = static_cast<int>(pc.p.front().size());
  if (n_theta < 3) fail(Errc::bad_input, "cylinder needs at least three theta samples");
  for (const auto& row : pc.p) {
    if (static_cast<int>(row.size()) != n_theta) fail(Errc::bad_input, "ragged cylinder grid");
  }

  const long long rank = std::llround(pc.p.front().front().trace().real());
  if (rank < 1) fail(Errc::rank_jump, "projection family has rank zero");

  auto frame_of = [&](const Matrix& proj) {
    if ((proj * proj - proj).norm() > 1e-7 * (1.0 + proj.norm())) {
      fail(Errc::bad_input, "cylinder entry is not a projection");
    }
    if (std::llround(proj.trace().real()) != rank) {
      fail(Errc::rank_jump, "projection family changes rank");
    }
    EigDecomp eig = eig_hermitian(proj);
    const int n = static_cast<int>(proj.rows());
    Matrix frame(n, rank);
    int col = 0;
    for (int i = 0; i < n; ++i) {
      if (eig.values(i) > 0.5) {
        if (col >= rank) fail(Errc::rank_jump, "projection family changes rank");
        frame.col(col++) = eig.vectors.col(i);
      }
    }
    if (col != rank) fail(Errc::rank_jump, "projection family changes rank");
    return frame;
  };

  auto check_boundary_frame = [&](const Matrix& frame, const Matrix& proj) {
    if (frame.cols() != rank ||
        (frame.adjoint() * frame - Matrix::Identity(rank, rank)).norm() > 1e-7 ||
        (proj * frame - frame).norm() > 1e-7 * (1.0 + proj.norm())) {
      fail(Errc::bad_input, "boundary frame does not span the boundary projection");
    }
    return frame;
  };

  std::vector<std::vector<Matrix>> frames(rows, std::vector<Matrix>(n_theta));
  for (int th = 0; th < n_theta; ++th) {
    frames[0][th] = check_boundary_frame(pc.frame_bottom[th], pc.p[0][th]);
    frames[rows - 1][th] = check_boundary_frame(pc.frame_top[th], pc.p[rows - 1][th]);
  }
  for (int l = 1; l + 1 < rows; ++l) {
    for (int th = 0; th < n_theta; ++th) frames[l][th] = frame_of(pc.p[l][th]);
  }

  auto link = [&](const Matrix& a, const Matrix& b) {
    Complex u = (a.adjoint() * b).determinant();
    if (std::abs(u) < 0.2) {
      fail(Errc::sampling_too_coarse, "frame overlap nearly vanishes; refine the grid");
    }
    return u / std::abs(u);
  };

  // Plaquette (th, l) traversed row-then-theta; this orientation makes the
  // unit-flux fixture evaluate to +1.
  double total = 0.0;
  for (int l = 0; l + 1 < rows; ++l) {
    for (int th = 0; th < n_theta; ++th) {
      const int th1 = (th + 1) % n_theta;
      Complex hol = link(frames[l][th], frames[l + 1][th]) *
                    link(frames[l + 1][th], frames[l + 1][th1]) *
                    std::conj(link(frames[l][th1], frames[l + 1][th1])) *
                    std::conj(link(frames[l][th], frames[l][th1]));
      double f = std::arg(hol);
      if (!(std::abs(f) < kPhaseStepMax)) {
        fail(Errc::sampling_too_coarse, "plaquette phase at or above pi/2; refine the grid");
      }
      total += f;
    }
  }
  double c = total / (2.0 * kPi);
  long long rounded = std::llround(c);
  if (std::abs(c - static_cast<double>(rounded)) > 1e-6) {
    fail(Errc::bad_input, "flux not integral; boundary gauge is not single-valued");
  }
  return rounded;
}

namespace {

Matrix negative_projection(const Matrix& m, double guard) {
  EigDecomp eig = eig_hermitian(m);
  const int n = static_cast<int>(m.rows());
  Matrix p = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    if (std::abs(eig.values(i)) < guard) {
      fail(Errc::gapless_suspension, "suspended operator has spectrum at zero");
    }
    if (eig.values(i) < 0) p += eig.vectors.col(i) * eig.vectors.col(i).adjoint();
  }
  return (p + p.adjoint()) / 2.0;
}

// Linear interpolation on the theta circle with on-the-fly doubling.
Matrix theta_interp(const std::vector<Matrix>& samples, double frac) {
  const int n = static_cast<int>(samples.size());
  double pos = frac * n;
  int j = static_cast<int>(std::floor(pos)) % n;
  double w = pos - std::floor(pos);
  return (1.0 - w) * samples[j] + w * samples[(j + 1) % n];
}

}  // namespace

std::vector<std::pair<long long, long long>> suspension_chern_raw(const GradedHermPath& g,
                                                                  int x_samples, int grid_cap,
                                                                  double gap_min) {
  g.validate_structure();
  for (const BlockSpec& b : g.path.shape.blocks) {
    if (b.kind != BlockKind::loop) {
      fail(Errc::bad_input, "odd-to-even suspension runs over loop blocks");
    }
  }
  std::vector<std::pair<long long, long long>> out;
  const int last = g.path.sample_count() - 1;

  for (int b = 0; b < g.path.shape.block_count(); ++b) {
    const int d = g.path.shape.block_matrix_dim(b, g.path.rank);
    const int h = d / 2;
    Matrix sigma = grading(h);
    const double guard = gap_min / 4.0;

    auto chern_of_endpoint = [&](int sample) {
      std::vector<Matrix> d_theta;
      for (int th = 0; th < g.path.shape.theta_count(b); ++th) {
        d_theta.push_back(g.path.samples[sample].at(b, th));
      }

      // rows sweep the extended cylinder: the trivializing homotopy into
      // sigma, the suspension proper, and the homotopy into -sigma.
      auto operator_at = [&](double theta_frac, double x) -> Matrix {
        Matrix dm = theta_interp(d_theta, theta_frac);
        if (x <= 0.0) return (1.0 + x) * dm + sigma;
        if (x >= 1.0) return (2.0 - x) * dm - sigma;
        return dm + std::cos(kPi * x) * sigma;
      };

      int n_theta = g.path.shape.theta_count(b);
      int nx = std::max(x_samples, 8);
      while (true) {
        ProjectionCylinder pc;
        const int rows = 3 * nx + 1;
        pc.p.assign(rows, std::vector<Matrix>(n_theta));
        for (int l = 0; l < rows; ++l) {
          double x = -1.0 + 3.0 * static_cast<double>(l) / (rows - 1);
          for (int th = 0; th < n_theta; ++th) {
            pc.p[l][th] =
                negative_projection(operator_at(static_cast<double>(th) / n_theta, x), guard);
          }
        }
        Matrix bottom(d, h), top(d, h);  // 1_{<0}(sigma) and 1_{<0}(-sigma)
        bottom.setZero();
        bottom.bottomRows(h) = Matrix::Identity(h, h);
        top.setZero();
        top.topRows(h) = Matrix::Identity(h, h);
        pc.frame_bottom.assign(n_theta, bottom);
        pc.frame_top.assign(n_theta, top);
        try {
          return bott_beta_cylinder(pc);
        } catch (const Error& e) {
          if (e.code() != Errc::sampling_too_coarse || 2 * n_theta > grid_cap ||
              2 * nx > grid_cap) {
            throw;
          }
          n_theta *= 2;
          nx *= 2;
        }
      }
    };

    out.emplace_back(chern_of_endpoint(0), chern_of_endpoint(last));
  }
  return out;
}

SuspendOddEvenReport suspend_odd_to_even(const GradedHermPath& g, int x_samples, int grid_cap,
                                         const FlowParams& params) {
  SuspendOddEvenReport rep{odd_spectral_flow(g, params.gap_min), {}, {}, false};
  std::vector<std::pair<long long, long long>> chern =
      suspension_chern_raw(g, x_samples, grid_cap, params.gap_min);
  for (int b = 0; b < g.path.shape.block_count(); ++b) {
    rep.chern_start.push_back(chern[b].first);
    rep.chern_end.push_back(chern[b].second);
    long long predicted = kFrozenSigns.sigma_c * (chern[b].first - chern[b].second);
    if (predicted != rep.odd_flow.components[b]) {
      fail(Errc::cross_check_failed, "suspension Chern difference disagrees with the odd flow");
    }
  }
  rep.consistent = true;
  return rep;
}

GradedHermPath suspend_bounded(const AElement& f, int t_samples) {
  f.validate();
  if (f.hermiticity_defect() > tol_herm(f.norm())) fail(Errc::not_hermitian, "F not hermitian");
  AElement sq = f * f - AElement::identity(f.shape, f.rank);
  if (sq.norm() > 0.1) fail(Errc::not_almost_involution, "||F^2 - 1|| exceeds 0.1");

  GradedHermPath g;
  g.half = f.rank;
  g.path.shape = f.shape;
  g.path.rank = 2 * f.rank;
  for (int i = 0; i < t_samples; ++i) {
    double t = static_cast<double>(i) / (t_samples - 1);
    double c = std::cos(kPi * t);
    double s = std::sin(kPi * t);
    AElement sample = AElement::zero(f.shape, 2 * f.rank);
    for (int b = 0; b < f.shape.block_count(); ++b) {
      const int h = f.shape.block_matrix_dim(b, f.rank);
      for (int th = 0; th < f.shape.theta_count(b); ++th) {
        Matrix w = c * Matrix::Identity(h, h) + Complex(0, 1) * s * f.at(b, th);
        sample.at(b, th).topRightCorner(h, h) = w.adjoint();
        sample.at(b, th).bottomLeftCorner(h, h) = w;
      }
    }
    g.path.t_grid.push_back(t);
    g.path.samples.push_back(std::move(sample));
  }
  g.path.t_grid.front() = 0.0;
  g.path.t_grid.back() = 1.0;
  return g;
}

SuspendBoundedReport suspend_bounded_check(const AElement& f, int t_samples, int grid_cap) {
  GradedHermPath g = suspend_bounded(f, t_samples + 1);
  SuspendBoundedReport rep{KOneClass::zero(f.shape), KOneClass::zero(f.shape), false};

  std::vector<long long> winding(f.shape.block_count(), 0);
  std::vector<long long> chern(f.shape.block_count(), 0);
  for (int b = 0; b < f.shape.block_count(); ++b) {
    if (f.shape.blocks[b].kind != BlockKind::loop) continue;

    // winding of det exp(i pi (F + 1)) over theta
    std::vector<Matrix> loop;
    for (int th = 0; th < f.shape.theta_count(b); ++th) {
      loop.push_back(unitary_calculus(
          f.at(b, th), [](double x) { return std::exp(Complex(0, kPi * (x + 1.0))); }));
    }
    winding[b] = det_phase_winding(loop, /*wrap=*/true, 0.5);

    // Chern of the negative projections of the closed suspension; the ends
    // F_0 and F_1 = -F_0 are theta-constant involutions.
    const int h = f.shape.block_matrix_dim(b, f.rank);
    int n_theta = f.shape.theta_count(b);
    std::vector<Matrix> f_theta;
    for (int th = 0; th < n_theta; ++th) f_theta.push_back(f.at(b, th));

    auto sample_at = [&](double theta_frac, double t) {
      double c = std::cos(kPi * t);
      double s = std::sin(kPi * t);
      Matrix fw = theta_interp(f_theta, theta_frac);
      Matrix m = Matrix::Zero(2 * h, 2 * h);
      Matrix w = c * Matrix::Identity(h, h) + Complex(0, 1) * s * fw;
      m.topRightCorner(h, h) = w.adjoint();
      m.bottomLeftCorner(h, h) = w;
      return m;
    };

    int nt = std::max(t_samples, 8);
    while (true) {
      ProjectionCylinder pc;
      pc.p.assign(nt + 1, std::vector<Matrix>(n_theta));
      for (int l = 0; l <= nt; ++l) {
        double t = static_cast<double>(l) / nt;
        for (int th = 0; th < n_theta; ++th) {
          pc.p[l][th] = negative_projection(sample_at(static_cast<double>(th) / n_theta, t), 0.5);
        }
      }
      Matrix bottom(2 * h, h), top(2 * h, h);
      bottom.topRows(h) = Matrix::Identity(h, h) / std::sqrt(2.0);
      bottom.bottomRows(h) = -Matrix::Identity(h, h) / std::sqrt(2.0);
      top.topRows(h) = Matrix::Identity(h, h) / std::sqrt(2.0);
      top.bottomRows(h) = Matrix::Identity(h, h) / std::sqrt(2.0);
      pc.frame_bottom.assign(n_theta, bottom);
      pc.frame_top.assign(n_theta, top);
      try {
        chern[b] = kFrozenSigns.sigma_c * bott_beta_cylinder(pc);
        break;
      } catch (const Error& e) {
        if (e.code() != Errc::sampling_too_coarse || 2 * n_theta > grid_cap || 2 * nt > grid_cap) {
          throw;
        }
        n_theta *= 2;
        nt *= 2;
      }
    }
  }
  rep.winding_class = KOneClass(f.shape, std::move(winding));
  rep.chern_class = KOneClass(f.shape, std::move(chern));
  if (!(rep.winding_class == rep.chern_class)) {
    fail(Errc::cross_check_failed, "suspension class disagrees with the exponential winding");
  }
  rep.consistent = true;
  return rep;
}

SplittingReport splitting_correction_check(const AElement& d_n,
                                           const std::vector<Matrix>& u0_kernel,
                                           const std::vector<Matrix>& u1_kernel,
                                           double gap_min) {
  d_n.validate();
  if (d_n.shape.block_count() != 1 || d_n.shape.blocks[0].kind != BlockKind::loop) {
    fail(Errc::bad_input, "splitting check runs over a single loop block");
  }
  if (d_n.rank % 2 != 0) fail(Errc::bad_input, "graded element needs even rank");
  const int n_theta = d_n.shape.theta_count(0);
  if (static_cast<int>(u0_kernel.size()) != n_theta ||
      static_cast<int>(u1_kernel.size()) != n_theta) {
    fail(Errc::bad_input, "kernel unitaries must be sampled on the theta grid");
  }
  const int d = d_n.shape.block_matrix_dim(0, d_n.rank);
  const int h = d / 2;
  const double scale = d_n.norm();
  const double kernel_tol = 1e-7 * (1.0 + scale);

  AElement p0 = AElement::zero(d_n.shape, d_n.rank);
  AElement p1 = AElement::zero(d_n.shape, d_n.rank);
  int kernel_rank = -1;

  for (int th = 0; th < n_theta; ++th) {
    const Matrix& m = d_n.at(0, th);
    if (odd_defect(m) > 1e-8 * (1.0 + scale)) fail(Errc::not_odd, "d_n is not odd");
    Matrix w = m.bottomLeftCorner(h, h);
    Eigen::JacobiSVD<Matrix> svd(w, Eigen::ComputeFullU | Eigen::ComputeFullV);
    int null_dim = 0;  // singular values sorted descending
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
      if (svd.singularValues()(i) < kernel_tol) ++null_dim;
    }
    if (null_dim < h && svd.singularValues()(h - null_dim - 1) < 10.0 * kernel_tol) {
      fail(Errc::kernel_rank_jump, "kernel band not separated from the spectrum");
    }
    if (kernel_rank < 0) kernel_rank = null_dim;
    if (null_dim != kernel_rank) fail(Errc::kernel_rank_jump, "kernel rank varies with theta");
    if (static_cast<int>(u0_kernel[th].rows()) != kernel_rank) {
      fail(Errc::bad_input, "kernel unitary size mismatch");
    }

    Matrix k_plus = svd.matrixV().rightCols(kernel_rank);   // ker W
    Matrix k_minus = svd.matrixU().rightCols(kernel_rank);  // ker W*

    // positive spectral projection of the odd element
    EigDecomp eig = eig_hermitian(m);
    Matrix pos = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i) {
      if (eig.values(i) > 10.0 * kernel_tol) {
        pos += eig.vectors.col(i) * eig.vectors.col(i).adjoint();
      } else if (std::abs(eig.values(i)) > kernel_tol && eig.values(i) > -10.0 * kernel_tol) {
        fail(Errc::kernel_rank_jump, "spectrum inside the kernel guard band");
      }
    }

    auto kernel_lagrangian = [&](const Matrix& u) {
      Matrix frame(d, kernel_rank);
      frame.topRows(h) = k_plus;
      frame.bottomRows(h) = k_minus * u;
      frame /= std::sqrt(2.0);
      return (frame * frame.adjoint()).eval();
    };
    p0.at(0, th) = pos + kernel_lagrangian(u0_kernel[th]);
    p1.at(0, th) = pos + kernel_lagrangian(u1_kernel[th]);
  }

  SplittingReport rep{KOneClass::zero(d_n.shape), KOneClass::zero(d_n.shape), false};
  rep.odd_index =
      odd_rel_index(LagrangianProjection(p0), LagrangianProjection(p1), gap_min);

  std::vector<Matrix> pair_loop;
  for (int th = 0; th < n_theta; ++th) {
    pair_loop.push_back(u0_kernel[th] * u1_kernel[th].adjoint());
  }
  rep.maslov_class =
      KOneClass(d_n.shape, {det_phase_winding(pair_loop, /*wrap=*/true, gap_min)});
  if (!(rep.odd_index == rep.maslov_class)) {
    fail(Errc::cross_check_failed, "odd relative index disagrees with the kernel Maslov class");
  }
  rep.holds = true;
  return rep;
}

}  // namespace sflow
