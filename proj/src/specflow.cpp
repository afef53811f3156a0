#include "sflow/specflow.hpp"

#include <algorithm>
#include <cmath>

namespace sflow {

namespace {

// Normalizing function: linear ramp on the endpoint gap composed with the
// bounded transform, clamped so endpoint spectra land exactly on +-1.
std::function<double(double)> make_chi(double endpoint_gap) {
  const double g = endpoint_gap / 2.0;
  return [g](double x) {
    double r = x / g;
    double b = std::sqrt(2.0) * r / std::sqrt(1.0 + r * r);
    return std::clamp(b, -1.0, 1.0);
  };
}

// U(x) = exp(i pi (x + 1)) on [-1,1], constantly 1 outside; the extension to
// the circle has winding number one.
Complex u_of(double x) {
  if (x <= -1.0 || x >= 1.0) return Complex(1.0, 0.0);
  return std::exp(Complex(0.0, kPi * (x + 1.0)));
}

Matrix loop_matrix(const Matrix& d, const std::function<double(double)>& chi) {
  return unitary_calculus(d, [&](double x) { return u_of(chi(x)); });
}

struct PhaseAccumulator {
  const std::function<double(double)>& chi;
  int refine_max;

  double step(const Matrix& da, const Matrix& db, const Complex& det_a, const Complex& det_b,
              int depth) const {
    double delta = std::arg(det_b / det_a);
    if (std::abs(delta) < kPhaseStepMax) return delta;
    if (depth >= refine_max) {
      fail(Errc::sampling_too_coarse, "winding route: phase step stuck above pi/2");
    }
    Matrix dm = (da + db) / 2.0;
    Complex det_m = loop_matrix(dm, chi).determinant();
    return step(da, dm, det_a, det_m, depth + 1) + step(dm, db, det_m, det_b, depth + 1);
  }
};

long long slice_winding(const std::vector<Matrix>& d_samples,
                        const std::function<double(double)>& chi, int refine_max,
                        double* total_phase) {
  PhaseAccumulator acc{chi, refine_max};
  double phase = 0.0;
  Complex det_prev = loop_matrix(d_samples.front(), chi).determinant();
  Matrix prev = d_samples.front();
  for (std::size_t i = 1; i < d_samples.size(); ++i) {
    Complex det_next = loop_matrix(d_samples[i], chi).determinant();
    phase += acc.step(prev, d_samples[i], det_prev, det_next, 0);
    prev = d_samples[i];
    det_prev = det_next;
  }
  if (total_phase) *total_phase = phase;
  double w = phase / (2.0 * kPi);
  long long rounded = std::llround(w);
  if (std::abs(w - static_cast<double>(rounded)) > 1e-6) {
    fail(Errc::sampling_too_coarse, "winding " + std::to_string(w) + " not integral");
  }
  return rounded;
}

PathValidity require_valid(const HermPath& p, double gap_min) {
  PathValidity v = validate_path(p, gap_min);
  if (v.verdict != PathVerdict::valid) {
    fail(Errc::invalid_path, std::string("path verdict is ") + verdict_name(v.verdict));
  }
  return v;
}

void attach_endpoint_signatures(const HermPath& p, FlowDiagnostics& diag) {
  for (int b = 0; b < p.shape.block_count(); ++b) {
    diag.endpoint_signature_start.push_back(signature(p.samples.front().at(b, 0)));
    diag.endpoint_signature_end.push_back(signature(p.samples.back().at(b, 0)));
  }
}

}  // namespace

std::vector<long long> winding_route_raw(const HermPath& p, const FlowParams& params) {
  PathValidity v = require_valid(p, params.gap_min);
  auto chi = make_chi(v.endpoint_gap);
  std::vector<long long> out;
  for (int b = 0; b < p.shape.block_count(); ++b) {
    long long value = 0;
    for (int th = 0; th < p.shape.theta_count(b); ++th) {
      std::vector<Matrix> slice;
      slice.reserve(p.samples.size());
      for (const AElement& s : p.samples) slice.push_back(s.at(b, th));
      long long w = slice_winding(slice, chi, params.refine_max, nullptr);
      if (th == 0) {
        value = w;
      } else if (w != value) {
        fail(Errc::theta_inconsistent, "loop-block winding varies with theta");
      }
    }
    out.push_back(value);
  }
  return out;
}

FlowResult spectral_flow_winding(const HermPath& p, const FlowParams& params) {
  PathValidity v = require_valid(p, params.gap_min);
  auto chi = make_chi(v.endpoint_gap);
  FlowResult out{KZeroClass::zero(p.shape), {}};
  out.diagnostics.route = "winding";
  for (int b = 0; b < p.shape.block_count(); ++b) {
    long long value = 0;
    double phase_theta0 = 0.0;
    for (int th = 0; th < p.shape.theta_count(b); ++th) {
      std::vector<Matrix> slice;
      slice.reserve(p.samples.size());
      for (const AElement& s : p.samples) slice.push_back(s.at(b, th));
      double phase = 0.0;
      long long w = slice_winding(slice, chi, params.refine_max, &phase);
      if (th == 0) {
        value = w;
        phase_theta0 = phase;
      } else if (w != value) {
        fail(Errc::theta_inconsistent, "loop-block winding varies with theta");
      }
    }
    out.value.components[b] = kFrozenSigns.sigma_e * value;
    out.diagnostics.winding_phase.push_back(phase_theta0);
  }
  attach_endpoint_signatures(p, out.diagnostics);
  return out;
}

FlowResult spectral_flow_crossings(const HermPath& p, const FlowParams& params) {
  require_valid(p, params.gap_min);
  FlowResult out{KZeroClass::zero(p.shape), {}};
  out.diagnostics.route = "crossings";
  for (int b = 0; b < p.shape.block_count(); ++b) {
    long long value = 0;
    for (int th = 0; th < p.shape.theta_count(b); ++th) {
      std::vector<Matrix> slice;
      slice.reserve(p.samples.size());
      for (const AElement& s : p.samples) slice.push_back(s.at(b, th));
      SliceCrossings sc = slice_zero_crossings(p.t_grid, slice, -1.0, params.refine_max);
      if (th == 0) {
        value = sc.net;
        for (const SliceCrossingEvent& e : sc.events) {
          out.diagnostics.crossings.push_back(CrossingEvent{b, th, e.t, e.direction});
        }
      } else if (sc.net != value) {
        fail(Errc::theta_inconsistent, "crossing count varies with theta");
      }
    }
    out.value.components[b] = value;
  }
  attach_endpoint_signatures(p, out.diagnostics);
  return out;
}

namespace {

// 1_{[-level, +inf)}(D) as an element projection; level = 0 gives the
// nonnegative spectral projection of an invertible sample.
AElement half_space_projection(const AElement& d, double level, double tol) {
  AElement out = d;
  for (int b = 0; b < d.shape.block_count(); ++b) {
    for (int th = 0; th < d.shape.theta_count(b); ++th) {
      const Matrix& m = d.at(b, th);
      double upper = m.norm() + std::abs(level) + 1.0;
      out.at(b, th) = spectral_projection(m, -level, upper, tol);
    }
  }
  return out;
}

}  // namespace

FlowResult spectral_flow_sections(const HermPath& p, const FlowParams& params) {
  PathValidity v = require_valid(p, params.gap_min);
  std::vector<PathSegment> segments = find_segments(p, params.gap_min, params.segment_seed);

  FlowResult out{KZeroClass::zero(p.shape), {}};
  out.diagnostics.route = "sections";
  out.diagnostics.segments = segments;

  const double endpoint_tol = std::min(tol_zero(1.0), v.endpoint_gap / 4.0);
  auto add_term = [&](int marker, double level_before, double level_after, const AElement& p_new,
                      const AElement& p_old) {
    KZeroClass term = rel_index_fredholm(ProjectionPair(p_new, p_old));
    out.value = k_add(out.value, term);
    out.diagnostics.junctions.push_back(
        JunctionTerm{marker, level_before, level_after, term.components});
  };

  const AElement& d0 = p.samples.front();
  const AElement& d1 = p.samples.back();
  add_term(-1, 0.0, segments.front().level,
           half_space_projection(d0, segments.front().level, -1.0),
           half_space_projection(d0, 0.0, endpoint_tol));
  for (std::size_t i = 0; i + 1 < segments.size(); ++i) {
    const AElement& dj = p.samples[segments[i].last];
    add_term(segments[i].last, segments[i].level, segments[i + 1].level,
             half_space_projection(dj, segments[i + 1].level, -1.0),
             half_space_projection(dj, segments[i].level, -1.0));
  }
  add_term(-2, segments.back().level, 0.0, half_space_projection(d1, 0.0, endpoint_tol),
           half_space_projection(d1, segments.back().level, -1.0));

  attach_endpoint_signatures(p, out.diagnostics);
  return out;
}

FlowResult loop_spectral_flow(const HermPath& p, std::optional<double> level,
                              const FlowParams& params) {
  p.validate_structure();
  const AElement& d0 = p.samples.front();
  if ((d0 - p.samples.back()).norm() > 1e-12 * (1.0 + d0.norm())) {
    fail(Errc::endpoint_mismatch, "loop flow needs D_0 = D_1 exactly");
  }
  double a;
  if (level) {
    a = *level;
  } else {
    // widest-clearance level off the endpoint spectrum
    std::vector<double> abs_values;
    for (int b = 0; b < p.shape.block_count(); ++b) {
      for (int th = 0; th < p.shape.theta_count(b); ++th) {
        EigDecomp eig = eig_hermitian(d0.at(b, th));
        for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
          abs_values.push_back(std::abs(eig.values(i)));
        }
      }
    }
    std::sort(abs_values.begin(), abs_values.end());
    a = abs_values.back() + 1.0;
    double best = 0.0;
    if (abs_values.front() > 2.0 * params.gap_min) {
      a = abs_values.front() / 2.0;
      best = a;
    }
    for (std::size_t i = 0; i + 1 < abs_values.size(); ++i) {
      double mid = (abs_values[i] + abs_values[i + 1]) / 2.0;
      double margin = (abs_values[i + 1] - abs_values[i]) / 2.0;
      if (margin > best) {
        best = margin;
        a = mid;
      }
    }
    if (best <= 0.0) fail(Errc::gap_hits_spectrum, "no gap level clears the endpoint spectrum");
  }

  AElement shift = trivializing_operator(d0, a);
  HermPath shifted = p;
  for (AElement& s : shifted.samples) s = s + shift;
  return spectral_flow_winding(shifted, params);
}

HermPath concatenate(const HermPath& p, const HermPath& q) {
  p.validate_structure();
  q.validate_structure();
  if (!(p.shape == q.shape) || p.rank != q.rank) {
    fail(Errc::shape_mismatch, "concatenation needs matching shapes");
  }
  if ((p.samples.back() - q.samples.front()).norm() >
      1e-12 * (1.0 + p.samples.back().norm())) {
    fail(Errc::endpoint_mismatch, "p(1) != q(0)");
  }
  HermPath out;
  out.shape = p.shape;
  out.rank = p.rank;
  for (std::size_t i = 0; i < p.samples.size(); ++i) {
    out.t_grid.push_back(p.t_grid[i] / 2.0);
    out.samples.push_back(p.samples[i]);
  }
  for (std::size_t i = 1; i < q.samples.size(); ++i) {
    out.t_grid.push_back((1.0 + q.t_grid[i]) / 2.0);
    out.samples.push_back(q.samples[i]);
  }
  out.t_grid.back() = 1.0;
  return out;
}

HermPath reverse(const HermPath& p) {
  p.validate_structure();
  HermPath out;
  out.shape = p.shape;
  out.rank = p.rank;
  const int n = p.sample_count();
  for (int i = n - 1; i >= 0; --i) {
    out.t_grid.push_back(1.0 - p.t_grid[i]);
    out.samples.push_back(p.samples[i]);
  }
  out.t_grid.front() = 0.0;
  out.t_grid.back() = 1.0;
  return out;
}

HermPath direct_sum(const HermPath& p, const HermPath& q) {
  p.validate_structure();
  q.validate_structure();
  if (!(p.shape == q.shape)) fail(Errc::shape_mismatch, "direct sum needs one shape");
  if (p.t_grid != q.t_grid) fail(Errc::bad_input, "direct sum needs a common t grid");
  HermPath out;
  out.shape = p.shape;
  out.rank = p.rank + q.rank;
  out.t_grid = p.t_grid;
  for (int i = 0; i < p.sample_count(); ++i) {
    AElement s = AElement::zero(p.shape, out.rank);
    for (int b = 0; b < p.shape.block_count(); ++b) {
      const int dp = p.shape.block_matrix_dim(b, p.rank);
      const int dq = q.shape.block_matrix_dim(b, q.rank);
      for (int th = 0; th < p.shape.theta_count(b); ++th) {
        s.at(b, th).topLeftCorner(dp, dp) = p.samples[i].at(b, th);
        s.at(b, th).bottomRightCorner(dq, dq) = q.samples[i].at(b, th);
      }
    }
    out.samples.push_back(std::move(s));
  }
  return out;
}

}  // namespace sflow
