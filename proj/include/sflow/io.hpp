#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "sflow/oracle.hpp"

namespace sflow::io {

using Json = nlohmann::ordered_json;

// Problem file: version "1", an algebra shape, a task name, a task-specific
// payload of nested real arrays ([t][block][theta?][row][col], complex
// entries as [re, im]), and optional config overrides.
struct Problem {
  std::string task;
  AlgebraShape algebra;
  Json payload;

  double gap_min = kDefaultGapMin;
  int refine_max = kDefaultRefineMax;
  double tol_zero = -1.0;
  std::uint64_t seed = 1;
  int x_samples = 33;
  int oversample = 4;
};

Problem parse_problem(const Json& j);

Matrix decode_matrix(const Json& j);
Json encode_matrix(const Matrix& m);

AElement decode_element(const Json& j, const AlgebraShape& shape, int rank);
Json encode_element(const AElement& a);

HermPath decode_path(const Json& payload, const AlgebraShape& shape);

Json encode_k0(const KZeroClass& c);
Json encode_k1(const KOneClass& c);
Json encode_signs();

// Exit-code category of an error code: 2 validation refusal, 3 schema or
// input defect, 4 internal cross-check failure.
int exit_code_for(Errc c);

struct RunResult {
  int exit_code = 0;
  Json result;
};

// Executes a parsed problem; never throws (failures are encoded in the
// result and exit code).  Curve CSV is written when curves_path is
// non-empty and the task carries an operator path.
RunResult run_problem(const Problem& p, const std::string& curves_path);

}  // namespace sflow::io
