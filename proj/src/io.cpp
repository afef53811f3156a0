#include "sflow/io.hpp"

#include <cstdio>
#include <fstream>

namespace sflow::io {

namespace {

[[noreturn]] void schema_fail(const std::string& msg) { fail(Errc::bad_input, msg); }

const Json& need(const Json& j, const char* key) {
  if (!j.contains(key)) schema_fail(std::string("missing field '") + key + "'");
  return j.at(key);
}

Complex decode_complex(const Json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    schema_fail("complex entries are [re, im] pairs");
  }
  return Complex(j[0].get<double>(), j[1].get<double>());
}

Json encode_complex(const Complex& z) { return Json::array({z.real(), z.imag()}); }

}  // namespace

Matrix decode_matrix(const Json& j) {
  if (!j.is_array() || j.empty()) schema_fail("matrix must be a non-empty array of rows");
  const int rows = static_cast<int>(j.size());
  const int cols = static_cast<int>(j[0].size());
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (static_cast<int>(j[r].size()) != cols) schema_fail("ragged matrix rows");
    for (int c = 0; c < cols; ++c) m(r, c) = decode_complex(j[r][c]);
  }
  return m;
}

Json encode_matrix(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(encode_complex(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

AElement decode_element(const Json& j, const AlgebraShape& shape, int rank) {
  if (!j.is_array() || static_cast<int>(j.size()) != shape.block_count()) {
    schema_fail("element must list one entry per block");
  }
  AElement out = AElement::zero(shape, rank);
  for (int b = 0; b < shape.block_count(); ++b) {
    if (shape.blocks[b].kind == BlockKind::loop) {
      if (!j[b].is_array() || static_cast<int>(j[b].size()) != shape.theta_count(b)) {
        schema_fail("loop block needs theta_samples matrices");
      }
      for (int th = 0; th < shape.theta_count(b); ++th) out.at(b, th) = decode_matrix(j[b][th]);
    } else {
      out.at(b, 0) = decode_matrix(j[b]);
    }
  }
  out.validate();
  return out;
}

Json encode_element(const AElement& a) {
  Json blocks = Json::array();
  for (int b = 0; b < a.shape.block_count(); ++b) {
    if (a.shape.blocks[b].kind == BlockKind::loop) {
      Json thetas = Json::array();
      for (int th = 0; th < a.shape.theta_count(b); ++th) thetas.push_back(encode_matrix(a.at(b, th)));
      blocks.push_back(std::move(thetas));
    } else {
      blocks.push_back(encode_matrix(a.at(b, 0)));
    }
  }
  return blocks;
}

HermPath decode_path(const Json& payload, const AlgebraShape& shape) {
  HermPath p;
  p.shape = shape;
  p.rank = need(payload, "rank").get<int>();
  const Json& grid = need(payload, "t_grid");
  const Json& samples = need(payload, "samples");
  if (!grid.is_array() || !samples.is_array() || grid.size() != samples.size()) {
    schema_fail("t_grid and samples must be arrays of equal length");
  }
  for (const Json& t : grid) p.t_grid.push_back(t.get<double>());
  for (const Json& s : samples) p.samples.push_back(decode_element(s, shape, p.rank));
  p.validate_structure();
  return p;
}

Problem parse_problem(const Json& j) {
  Problem p;
  if (need(j, "version").get<std::string>() != "1") schema_fail("unsupported version");
  p.task = need(j, "task").get<std::string>();
  const Json& alg = need(j, "algebra");
  for (const Json& blk : need(alg, "blocks")) {
    BlockSpec spec;
    std::string kind = need(blk, "kind").get<std::string>();
    if (kind == "scalar") {
      spec.kind = BlockKind::scalar;
      spec.theta_samples = 1;
    } else if (kind == "loop") {
      spec.kind = BlockKind::loop;
      spec.theta_samples = need(blk, "theta_samples").get<int>();
    } else {
      schema_fail("block kind must be 'scalar' or 'loop'");
    }
    spec.dim = need(blk, "dim").get<int>();
    p.algebra.blocks.push_back(spec);
  }
  p.algebra.validate();
  p.payload = j.contains("payload") ? j.at("payload") : Json::object();
  if (j.contains("config")) {
    const Json& c = j.at("config");
    if (c.contains("gap_min")) p.gap_min = c.at("gap_min").get<double>();
    if (c.contains("refine_max")) p.refine_max = c.at("refine_max").get<int>();
    if (c.contains("tol_zero")) p.tol_zero = c.at("tol_zero").get<double>();
    if (c.contains("seed")) p.seed = c.at("seed").get<std::uint64_t>();
    if (c.contains("x_samples")) p.x_samples = c.at("x_samples").get<int>();
    if (c.contains("oversample")) p.oversample = c.at("oversample").get<int>();
  }
  return p;
}

Json encode_k0(const KZeroClass& c) { return Json(c.components); }
Json encode_k1(const KOneClass& c) { return Json(c.components); }

Json encode_signs() {
  return Json{{"sigma_e", kFrozenSigns.sigma_e},
              {"sigma_d", kFrozenSigns.sigma_d},
              {"sigma_m", kFrozenSigns.sigma_m},
              {"sigma_s", kFrozenSigns.sigma_s},
              {"sigma_c", kFrozenSigns.sigma_c}};
}

int exit_code_for(Errc c) {
  switch (c) {
    case Errc::cross_check_failed:
    case Errc::inconsistent_conventions:
      return 4;
    case Errc::bad_input:
    case Errc::shape_mismatch:
    case Errc::unsupported_homomorphism:
    case Errc::not_hermitian:
    case Errc::not_projection:
    case Errc::not_lagrangian:
    case Errc::not_odd:
    case Errc::not_almost_involution:
    case Errc::not_normalizing:
      return 3;
    default:
      return 2;  // validation refusals
  }
}

namespace {

void write_curves(const HermPath& p, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) fail(Errc::bad_input, "cannot open curve output file");
  std::fprintf(f, "t,block,curve_index,eigenvalue\n");
  for (int b = 0; b < p.shape.block_count(); ++b) {
    const int n = p.shape.block_matrix_dim(b, p.rank);
    for (int th = 0; th < p.shape.theta_count(b); ++th) {
      for (int s = 0; s < p.sample_count(); ++s) {
        EigDecomp eig = eig_hermitian(p.samples[s].at(b, th));
        for (int j = 0; j < n; ++j) {
          std::fprintf(f, "%.17g,%d,%d,%.17g\n", p.t_grid[s], b, th * n + j, eig.values(j));
        }
      }
    }
  }
  std::fclose(f);
}

Json validity_json(const PathValidity& v) {
  return Json{{"verdict", verdict_name(v.verdict)},
              {"endpoint_gap", v.endpoint_gap},
              {"worst_step_motion", v.worst_step_motion},
              {"min_gap_profile", v.min_gap_profile}};
}

Json signature_json(const SpectralSignature& s) {
  return Json{{"n_plus", s.n_plus}, {"n_minus", s.n_minus}, {"n_zero", s.n_zero}};
}

Json flow_diag_json(const FlowResult& r) {
  Json j;
  j["route"] = r.diagnostics.route;
  if (!r.diagnostics.winding_phase.empty()) j["winding_phase"] = r.diagnostics.winding_phase;
  if (!r.diagnostics.segments.empty()) {
    Json segs = Json::array();
    for (const PathSegment& s : r.diagnostics.segments) {
      segs.push_back(Json{{"first", s.first}, {"last", s.last}, {"level", s.level}});
    }
    j["segments"] = std::move(segs);
  }
  if (!r.diagnostics.junctions.empty()) {
    Json js = Json::array();
    for (const JunctionTerm& t : r.diagnostics.junctions) {
      js.push_back(Json{{"sample", t.sample},
                        {"level_before", t.level_before},
                        {"level_after", t.level_after},
                        {"index_per_block", t.index_per_block}});
    }
    j["junctions"] = std::move(js);
  }
  if (!r.diagnostics.crossings.empty()) {
    Json cs = Json::array();
    for (const CrossingEvent& e : r.diagnostics.crossings) {
      cs.push_back(Json{{"block", e.block}, {"theta", e.theta}, {"t", e.t},
                        {"direction", e.direction}});
    }
    j["crossings"] = std::move(cs);
  }
  Json sig0 = Json::array(), sig1 = Json::array();
  for (const SpectralSignature& s : r.diagnostics.endpoint_signature_start) {
    sig0.push_back(signature_json(s));
  }
  for (const SpectralSignature& s : r.diagnostics.endpoint_signature_end) {
    sig1.push_back(signature_json(s));
  }
  j["endpoint_signature_start"] = std::move(sig0);
  j["endpoint_signature_end"] = std::move(sig1);
  return j;
}

LagrangianPath decode_lagrangian_path(const Json& payload, const AlgebraShape& shape) {
  LagrangianPath lp;
  lp.shape = shape;
  lp.rank = need(payload, "rank").get<int>();
  for (const Json& t : need(payload, "t_grid")) lp.t_grid.push_back(t.get<double>());
  for (const Json& s : need(payload, "u0")) lp.u0.push_back(decode_element(s, shape, lp.rank));
  for (const Json& s : need(payload, "u1")) lp.u1.push_back(decode_element(s, shape, lp.rank));
  lp.validate_structure();
  return lp;
}

GradedHermPath decode_graded_path(const Json& payload, const AlgebraShape& shape) {
  GradedHermPath g;
  g.half = need(payload, "half").get<int>();
  Json path_payload = payload;
  path_payload["rank"] = 2 * g.half;
  g.path = decode_path(path_payload, shape);
  g.validate_structure();
  return g;
}

Json run_task(const Problem& p, const std::string& curves_path, int& exit_code) {
  FlowParams params;
  params.gap_min = p.gap_min;
  params.refine_max = p.refine_max;
  params.segment_seed = std::nullopt;

  Json diag;
  Json result;
  result["task"] = p.task;

  if (p.task == "validate") {
    HermPath path = decode_path(p.payload, p.algebra);
    PathValidity v = validate_path(path, p.gap_min);
    if (!curves_path.empty()) write_curves(path, curves_path);
    result["status"] = v.verdict == PathVerdict::valid ? "ok" : "refused";
    result["diagnostics"] = validity_json(v);
    exit_code = v.verdict == PathVerdict::valid ? 0 : 2;
  } else if (p.task == "spectral-flow") {
    HermPath path = decode_path(p.payload, p.algebra);
    if (!curves_path.empty()) write_curves(path, curves_path);
    FlowResult winding = spectral_flow_winding(path, params);
    FlowResult crossings = spectral_flow_crossings(path, params);
    FlowResult sections = spectral_flow_sections(path, params);
    KZeroClass oracle = dense_crossing_oracle(path, p.oversample, p.gap_min);
    if (!(winding.value == crossings.value) || !(winding.value == sections.value) ||
        !(winding.value == oracle)) {
      fail(Errc::cross_check_failed, "flow routes disagree");
    }
    result["status"] = "ok";
    result["k0"] = encode_k0(winding.value);
    diag["winding"] = flow_diag_json(winding);
    diag["crossings"] = flow_diag_json(crossings);
    diag["sections"] = flow_diag_json(sections);
    diag["oracle_k0"] = encode_k0(oracle);
    result["diagnostics"] = std::move(diag);
  } else if (p.task == "relative-index") {
    int rank = need(p.payload, "rank").get<int>();
    ProjectionPair pair(decode_element(need(p.payload, "p"), p.algebra, rank),
                        decode_element(need(p.payload, "q"), p.algebra, rank));
    KZeroClass fredholm = rel_index_fredholm(pair);
    KZeroClass crossing = rel_index_crossing(pair);
    if (!(fredholm == crossing)) fail(Errc::cross_check_failed, "relative index routes disagree");
    result["status"] = "ok";
    result["k0"] = encode_k0(fredholm);
    result["diagnostics"] = Json{{"fredholm", encode_k0(fredholm)},
                                 {"crossing", encode_k0(crossing)}};
  } else if (p.task == "maslov") {
    LagrangianPath lp = decode_lagrangian_path(p.payload, p.algebra);
    MaslovParams mp{p.gap_min, p.refine_max};
    KZeroClass mu = maslov_pair(lp, mp);
    result["status"] = "ok";
    result["k0"] = encode_k0(mu);
    result["diagnostics"] = Json{{"raw_passes", maslov_pair_raw(lp, mp)}};
  } else if (p.task == "maslov-triple") {
    int rank = need(p.payload, "rank").get<int>();
    Lagrangian l0(decode_element(need(p.payload, "u0"), p.algebra, rank));
    Lagrangian l1(decode_element(need(p.payload, "u1"), p.algebra, rank));
    Lagrangian l2(decode_element(need(p.payload, "u2"), p.algebra, rank));
    KZeroClass tau = maslov_triple(l0, l1, l2, p.gap_min);
    result["status"] = "ok";
    result["k0"] = encode_k0(tau);
    result["diagnostics"] = Json::object();
  } else if (p.task == "odd-spectral-flow") {
    GradedHermPath g = decode_graded_path(p.payload, p.algebra);
    if (!curves_path.empty()) write_curves(g.path, curves_path);
    KOneClass flow = odd_spectral_flow(g, p.gap_min);
    result["status"] = "ok";
    result["k1"] = encode_k1(flow);
    result["diagnostics"] = Json::object();
  } else if (p.task == "odd-relative-index") {
    int rank = need(p.payload, "rank").get<int>();
    LagrangianProjection lp0(decode_element(need(p.payload, "p"), p.algebra, rank));
    LagrangianProjection lp1(decode_element(need(p.payload, "q"), p.algebra, rank));
    KOneClass idx = odd_rel_index(lp0, lp1, p.gap_min);
    result["status"] = "ok";
    result["k1"] = encode_k1(idx);
    result["diagnostics"] = Json::object();
  } else if (p.task == "suspend-check") {
    std::string direction = need(p.payload, "direction").get<std::string>();
    if (direction == "even-to-odd") {
      HermPath path = decode_path(p.payload, p.algebra);
      if (!curves_path.empty()) write_curves(path, curves_path);
      SuspendEvenOddReport rep = suspend_even_to_odd(path, p.x_samples, params);
      result["status"] = "ok";
      result["k0"] = encode_k0(rep.flow);
      result["diagnostics"] = Json{{"boundary_winding", rep.boundary_winding},
                                   {"consistent", rep.consistent}};
    } else if (direction == "odd-to-even") {
      GradedHermPath g = decode_graded_path(p.payload, p.algebra);
      SuspendOddEvenReport rep = suspend_odd_to_even(g, p.x_samples, 512, params);
      result["status"] = "ok";
      result["k1"] = encode_k1(rep.odd_flow);
      result["diagnostics"] = Json{{"chern_start", rep.chern_start},
                                   {"chern_end", rep.chern_end},
                                   {"consistent", rep.consistent}};
    } else {
      schema_fail("direction must be 'even-to-odd' or 'odd-to-even'");
    }
  } else if (p.task == "oracle-interval") {
    Matrix u0 = decode_matrix(need(p.payload, "u0"));
    Matrix u1 = decode_matrix(need(p.payload, "u1"));
    ShootingConfig cfg;
    const Json& window = need(p.payload, "window");
    cfg.lo = window[0].get<double>();
    cfg.hi = window[1].get<double>();
    if (p.payload.contains("dip_tol")) cfg.dip_tol = p.payload.at("dip_tol").get<double>();
    if (p.payload.contains("resolution")) cfg.resolution = p.payload.at("resolution").get<int>();
    std::vector<double> dips = shooting_spectrum(u0, u1, cfg);
    std::vector<double> closed = interval_spectrum(u0.adjoint() * u1, cfg.lo, cfg.hi);
    result["status"] = "ok";
    result["diagnostics"] = Json{{"shooting_dips", dips}, {"interval_spectrum", closed}};
  } else if (p.task == "axiom-suite") {
    int rank = need(p.payload, "rank").get<int>();
    int trials = need(p.payload, "trials").get<int>();
    AxiomReport rep = rel_index_axiom_suite(p.algebra, rank, trials, p.seed);
    Json failures = Json::array();
    for (const AxiomFailure& f : rep.failures) {
      failures.push_back(Json{{"axiom", f.axiom}, {"seed", f.seed}, {"detail", f.detail}});
    }
    result["status"] = rep.passed() ? "ok" : "failed";
    result["diagnostics"] = Json{{"trials", rep.trials}, {"failures", failures}};
    if (!rep.passed()) fail(Errc::cross_check_failed, "axiom suite reported failures");
  } else {
    schema_fail("unknown task '" + p.task + "'");
  }

  result["signs"] = encode_signs();
  return result;
}

}  // namespace

RunResult run_problem(const Problem& p, const std::string& curves_path) {
  RunResult out;
  try {
    out.result = run_task(p, curves_path, out.exit_code);
  } catch (const Error& e) {
    out.exit_code = exit_code_for(e.code());
    out.result = Json{{"task", p.task},
                      {"status", out.exit_code == 2 ? "refused" : "error"},
                      {"error", Json{{"code", errc_name(e.code())}, {"message", e.what()}}},
                      {"signs", encode_signs()}};
  } catch (const std::exception& e) {
    out.exit_code = 3;
    out.result = Json{{"task", p.task},
                      {"status", "error"},
                      {"error", Json{{"code", "BadInput"}, {"message", e.what()}}},
                      {"signs", encode_signs()}};
  }
  return out;
}

}  // namespace sflow::io
