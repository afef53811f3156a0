#include "sflow/oppath.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace sflow {

void HermPath::validate_structure() const {
  shape.validate();
  if (t_grid.size() != samples.size()) fail(Errc::bad_input, "grid/sample count mismatch");
  if (t_grid.size() < 2) fail(Errc::bad_input, "a path needs at least two samples");
  if (t_grid.front() != 0.0 || t_grid.back() != 1.0) {
    fail(Errc::bad_input, "t grid must start at 0 and end at 1");
  }
  for (std::size_t i = 0; i + 1 < t_grid.size(); ++i) {
    if (!(t_grid[i] < t_grid[i + 1])) fail(Errc::bad_input, "t grid must be strictly increasing");
  }
  for (const AElement& s : samples) {
    s.validate();
    if (!(s.shape == shape) || s.rank != rank) fail(Errc::shape_mismatch, "sample shape mismatch");
    if (s.hermiticity_defect() > tol_herm(s.norm())) {
      fail(Errc::not_hermitian, "path sample is not hermitian");
    }
  }
}

HermPath HermPath::constant(const AElement& value, int n) {
  HermPath p;
  p.shape = value.shape;
  p.rank = value.rank;
  for (int i = 0; i < n; ++i) {
    p.t_grid.push_back(static_cast<double>(i) / (n - 1));
    p.samples.push_back(value);
  }
  p.t_grid.front() = 0.0;
  p.t_grid.back() = 1.0;
  return p;
}

HermPath HermPath::linear(const AElement& a, const AElement& b, int n) {
  a.check_same_shape(b);
  HermPath p;
  p.shape = a.shape;
  p.rank = a.rank;
  for (int i = 0; i < n; ++i) {
    double t = static_cast<double>(i) / (n - 1);
    p.t_grid.push_back(t);
    p.samples.push_back((1.0 - t) * a + t * b);
  }
  p.t_grid.front() = 0.0;
  p.t_grid.back() = 1.0;
  return p;
}

const char* verdict_name(PathVerdict v) {
  switch (v) {
    case PathVerdict::valid: return "valid";
    case PathVerdict::refine: return "refine";
    case PathVerdict::invalid: return "invalid";
  }
  return "?";
}

SpectralCurves block_curves(const HermPath& p, int block, int theta) {
  SpectralCurves out;
  out.values.reserve(p.samples.size());
  out.vectors.reserve(p.samples.size());
  for (const AElement& s : p.samples) {
    EigDecomp eig = eig_hermitian(s.at(block, theta));
    out.values.push_back(eig.values);
    out.vectors.push_back(eig.vectors);
  }
  return out;
}

PathValidity validate_path(const HermPath& p, double gap_min, double motion_cap) {
  p.validate_structure();
  const int samples = p.sample_count();
  PathValidity v;
  v.min_gap_profile.assign(samples, std::numeric_limits<double>::infinity());

  for (int b = 0; b < p.shape.block_count(); ++b) {
    for (int th = 0; th < p.shape.theta_count(b); ++th) {
      SpectralCurves curves = block_curves(p, b, th);
      for (int s = 0; s < samples; ++s) {
        v.min_gap_profile[s] =
            std::min(v.min_gap_profile[s], curves.values[s].cwiseAbs().minCoeff());
      }
      for (int s = 0; s + 1 < samples; ++s) {
        std::vector<int> perm = match_eigenvectors(curves.vectors[s], curves.vectors[s + 1]);
        for (int j = 0; j < curves.values[s].size(); ++j) {
          v.worst_step_motion = std::max(
              v.worst_step_motion, std::abs(curves.values[s + 1](perm[j]) - curves.values[s](j)));
        }
      }
    }
  }

  v.endpoint_gap = std::min(v.min_gap_profile.front(), v.min_gap_profile.back());
  if (motion_cap < 0) motion_cap = v.endpoint_gap / 2.0;
  if (v.endpoint_gap < gap_min) {
    v.verdict = PathVerdict::invalid;
  } else if (v.worst_step_motion > motion_cap) {
    v.verdict = PathVerdict::refine;
  } else {
    v.verdict = PathVerdict::valid;
  }
  return v;
}

HermPath normalizing_transform(const HermPath& p, const std::function<double(double)>& f) {
  p.validate_structure();

  // Spot-check f on the union of the sampled spectra.
  std::vector<double> spectrum;
  for (const AElement& s : p.samples) {
    for (int b = 0; b < p.shape.block_count(); ++b) {
      for (int th = 0; th < p.shape.theta_count(b); ++th) {
        EigDecomp eig = eig_hermitian(s.at(b, th));
        for (Eigen::Index i = 0; i < eig.values.size(); ++i) spectrum.push_back(eig.values(i));
      }
    }
  }
  std::sort(spectrum.begin(), spectrum.end());
  if (std::abs(f(0.0)) > 1e-12) fail(Errc::not_normalizing, "f(0) != 0");
  const double probe = 1e-6 * (1.0 + std::abs(spectrum.back()));
  if (!(f(probe) > 0.0)) fail(Errc::not_normalizing, "f'(0) must be positive");
  for (double x : spectrum) {
    if (std::abs(f(-x) + f(x)) > 1e-9 * (1.0 + std::abs(f(x)))) {
      fail(Errc::not_normalizing, "f is not odd on the sampled spectrum");
    }
  }
  for (std::size_t i = 0; i + 1 < spectrum.size(); ++i) {
    if (f(spectrum[i]) > f(spectrum[i + 1]) + 1e-12) {
      fail(Errc::not_normalizing, "f is not non-decreasing on the sampled spectrum");
    }
  }

  HermPath out = p;
  for (AElement& s : out.samples) {
    for (auto& blk : s.blocks) {
      for (Matrix& m : blk) m = functional_calculus(m, f);
    }
  }
  return out;
}

AElement trivializing_operator(const AElement& d, double a, double tol) {
  d.validate();
  if (!(a > 0)) fail(Errc::bad_input, "gap level must be positive");
  if (d.hermiticity_defect() > tol_herm(d.norm())) fail(Errc::not_hermitian, "d not hermitian");
  const double guard = tol < 0 ? tol_zero(d.norm()) : tol;
  AElement out = d;
  for (int b = 0; b < d.shape.block_count(); ++b) {
    for (int th = 0; th < d.shape.theta_count(b); ++th) {
      EigDecomp eig = eig_hermitian(d.at(b, th));
      for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
        if (std::abs(std::abs(eig.values(i)) - a) <= guard) {
          fail(Errc::gap_hits_spectrum, "level +-a lies within tol of the spectrum");
        }
      }
      RealVector mask(eig.values.size());
      for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
        mask(i) = std::abs(eig.values(i)) < a ? 2.0 * a : 0.0;
      }
      Matrix m = eig.vectors * mask.asDiagonal() * eig.vectors.adjoint();
      out.at(b, th) = (m + m.adjoint()) / 2.0;
    }
  }
  return out;
}

namespace {

// Candidate gap levels for a window of samples: midpoints of gaps in the
// sorted |eigenvalue| set, plus half the smallest value when nonzero.  Only
// levels inside the spectral range qualify; shifting past the whole spectrum
// is kept as a last-resort fallback so that the junction structure stays
// genuinely local.
std::vector<double> candidate_levels(const std::vector<double>& abs_sorted) {
  std::vector<double> cands;
  if (abs_sorted.empty()) return cands;
  if (abs_sorted.front() > 0) cands.push_back(abs_sorted.front() / 2.0);
  for (std::size_t i = 0; i + 1 < abs_sorted.size(); ++i) {
    if (abs_sorted[i + 1] - abs_sorted[i] > 1e-12) {
      cands.push_back((abs_sorted[i] + abs_sorted[i + 1]) / 2.0);
    }
  }
  return cands;
}

double level_margin(double a, const std::vector<double>& abs_sorted) {
  double m = std::numeric_limits<double>::infinity();
  for (double v : abs_sorted) m = std::min(m, std::abs(v - a));
  return m;
}

}  // namespace

std::vector<PathSegment> find_segments(const HermPath& p, double gap_min,
                                       std::optional<std::uint64_t> seed) {
  PathValidity validity = validate_path(p, gap_min);
  if (validity.verdict != PathVerdict::valid) {
    fail(Errc::invalid_path, std::string("path verdict is ") + verdict_name(validity.verdict));
  }

  // Sorted spectra per (block, theta) slice and sample.
  std::vector<std::vector<RealVector>> spectra;  // [slice][sample]
  for (int b = 0; b < p.shape.block_count(); ++b) {
    for (int th = 0; th < p.shape.theta_count(b); ++th) {
      std::vector<RealVector> slice;
      for (const AElement& s : p.samples) {
        slice.push_back(eig_hermitian(s.at(b, th)).values);
      }
      spectra.push_back(std::move(slice));
    }
  }
  const int samples = p.sample_count();
  const double guard = 10.0 * tol_zero(1.0);

  // A level works for a sample window iff +-a clears every eigenvalue and the
  // count of eigenvalues >= -a is constant over the window in each slice.
  auto feasible_levels = [&](int first, int last) {
    std::vector<double> abs_values;
    for (const auto& slice : spectra) {
      for (int s = first; s <= last; ++s) {
        for (Eigen::Index i = 0; i < slice[s].size(); ++i) {
          abs_values.push_back(std::abs(slice[s](i)));
        }
      }
    }
    std::sort(abs_values.begin(), abs_values.end());
    std::vector<double> out;
    for (double a : candidate_levels(abs_values)) {
      if (level_margin(a, abs_values) <= guard) continue;
      bool ok = true;
      for (const auto& slice : spectra) {
        int ref = -1;
        for (int s = first; s <= last && ok; ++s) {
          int count = 0;
          for (Eigen::Index i = 0; i < slice[s].size(); ++i) {
            if (slice[s](i) >= -a) ++count;
          }
          if (ref < 0) ref = count;
          if (count != ref) ok = false;
        }
        if (!ok) break;
      }
      if (ok) out.push_back(a);
    }
    return out;
  };

  std::optional<std::mt19937_64> rng;
  if (seed) rng.emplace(*seed);

  // fallback for a single step no interior level covers: shift past the
  // whole local spectrum (the count is then full rank on both samples)
  auto above_spectrum_level = [&](int first, int last) {
    double top = 0.0;
    for (const auto& slice : spectra) {
      for (int s = first; s <= last; ++s) top = std::max(top, slice[s].cwiseAbs().maxCoeff());
    }
    return top + 1.0;
  };

  std::vector<PathSegment> segments;
  int start = 0;
  while (start < samples - 1) {
    int end = start + 1;
    if (feasible_levels(start, end).empty()) {
      segments.push_back(PathSegment{start, end, above_spectrum_level(start, end)});
      start = end;
      continue;
    }
    while (end + 1 < samples && !feasible_levels(start, end + 1).empty()) {
      ++end;
      if (rng && std::uniform_real_distribution<double>(0, 1)(*rng) < 0.25) break;
    }
    std::vector<double> levels = feasible_levels(start, end);
    double level;
    if (rng) {
      level = levels[std::uniform_int_distribution<std::size_t>(0, levels.size() - 1)(*rng)];
    } else {
      // Deterministic choice: the level with the widest clearance.
      std::vector<double> abs_values;
      for (const auto& slice : spectra) {
        for (int s = start; s <= end; ++s) {
          for (Eigen::Index i = 0; i < slice[s].size(); ++i) {
            abs_values.push_back(std::abs(slice[s](i)));
          }
        }
      }
      std::sort(abs_values.begin(), abs_values.end());
      level = levels.front();
      double best = level_margin(level, abs_values);
      for (double a : levels) {
        double m = level_margin(a, abs_values);
        if (m > best + 1e-15) {
          best = m;
          level = a;
        }
      }
    }
    segments.push_back(PathSegment{start, end, level});
    start = end;
  }
  return segments;
}

namespace {

double min_abs_eigenvalue(const Matrix& m) {
  return eig_hermitian(m).values.cwiseAbs().minCoeff();
}

}  // namespace

SliceCrossings slice_zero_crossings(const std::vector<double>& t_grid,
                                    const std::vector<Matrix>& samples, double tol0,
                                    int refine_max) {
  if (t_grid.size() != samples.size() || samples.size() < 2) {
    fail(Errc::bad_input, "slice needs matching grids with at least two samples");
  }
  double scale = 0.0;
  for (const Matrix& m : samples) scale = std::max(scale, m.norm());
  if (tol0 < 0) tol0 = tol_zero(scale);

  auto clean = [&](const Matrix& m) { return min_abs_eigenvalue(m) > tol0; };
  if (!clean(samples.front()) || !clean(samples.back())) {
    fail(Errc::invalid_path, "slice endpoints have an eigenvalue at zero");
  }

  // Bisect from the clean anchor toward the bad sample until the interpolant
  // clears zero; the net count only needs clean evaluation points.
  auto bisect_substitute = [&](double t_anchor, const Matrix& anchor, double t_bad,
                               const Matrix& bad) {
    double s = 0.5;
    for (int depth = 0; depth < refine_max; ++depth) {
      Matrix cand = (1.0 - s) * bad + s * anchor;
      if (clean(cand)) {
        return std::pair<double, Matrix>{(1.0 - s) * t_bad + s * t_anchor, cand};
      }
      s = (1.0 + s) / 2.0;
    }
    fail(Errc::unresolved_crossing,
         "eigenvalue pinned at zero near t = " + std::to_string(t_bad));
  };

  std::vector<double> ts;
  std::vector<Matrix> cleaned;
  const int n_samples = static_cast<int>(samples.size());
  int i = 0;
  while (i < n_samples) {
    if (clean(samples[i])) {
      ts.push_back(t_grid[i]);
      cleaned.push_back(samples[i]);
      ++i;
      continue;
    }
    int j = i;  // maximal run of bad samples
    while (j + 1 < n_samples && !clean(samples[j + 1])) ++j;
    auto left = bisect_substitute(t_grid[i - 1], samples[i - 1], t_grid[i], samples[i]);
    auto right = bisect_substitute(t_grid[j + 1], samples[j + 1], t_grid[j], samples[j]);
    ts.push_back(left.first);
    cleaned.push_back(left.second);
    ts.push_back(right.first);
    cleaned.push_back(right.second);
    i = j + 1;
  }

  SliceCrossings out;
  EigDecomp prev = eig_hermitian(cleaned.front());
  for (std::size_t s = 0; s + 1 < cleaned.size(); ++s) {
    EigDecomp next = eig_hermitian(cleaned[s + 1]);
    std::vector<int> perm = match_eigenvectors(prev.vectors, next.vectors);
    for (int j = 0; j < prev.values.size(); ++j) {
      double a = prev.values(j);
      double b = next.values(perm[j]);
      if (a < 0 && b > 0) {
        double tc = ts[s] + (ts[s + 1] - ts[s]) * (-a) / (b - a);
        out.events.push_back(SliceCrossingEvent{tc, +1});
        ++out.net;
      } else if (a > 0 && b < 0) {
        double tc = ts[s] + (ts[s + 1] - ts[s]) * a / (a - b);
        out.events.push_back(SliceCrossingEvent{tc, -1});
        --out.net;
      }
    }
    prev = std::move(next);
  }
  std::sort(out.events.begin(), out.events.end(),
            [](const SliceCrossingEvent& a, const SliceCrossingEvent& b) { return a.t < b.t; });
  return out;
}

}  // namespace sflow
