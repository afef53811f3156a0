#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "sflow/io.hpp"

int main(int argc, char** argv) {
  CLI::App app{"spectral flow, relative index and Maslov index computations "
               "over matrix and loop algebras"};

  std::string input_path;
  std::string output_path;
  std::string curves_path;
  double tol_zero = -1.0;
  double gap_min = -1.0;
  int refine_max = -1;
  std::uint64_t seed = 0;
  int threads = 1;

  app.add_option("--input", input_path, "problem file (JSON)")->required();
  app.add_option("--output", output_path, "result file (default: stdout)");
  app.add_option("--emit-curves", curves_path, "eigenvalue curve CSV for path tasks");
  app.add_option("--tol-zero", tol_zero, "zero-threshold override");
  app.add_option("--gap-min", gap_min, "endpoint gap threshold override");
  app.add_option("--refine-max", refine_max, "refinement depth override");
  app.add_option("--seed", seed, "seed for randomized suites");
  app.add_option("--threads", threads, "worker cap; results are identical for any value");

  CLI11_PARSE(app, argc, argv);
  (void)threads;  // outputs are deterministic regardless

  sflow::io::Json problem_json;
  try {
    std::ifstream in(input_path);
    if (!in) {
      std::fprintf(stderr, "cannot open input file: %s\n", input_path.c_str());
      return 3;
    }
    in >> problem_json;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "input is not valid JSON: %s\n", e.what());
    return 3;
  }

  sflow::io::RunResult run;
  try {
    sflow::io::Problem problem = sflow::io::parse_problem(problem_json);
    if (tol_zero > 0) problem.tol_zero = tol_zero;
    if (gap_min > 0) problem.gap_min = gap_min;
    if (refine_max > 0) problem.refine_max = refine_max;
    if (seed != 0) problem.seed = seed;
    run = sflow::io::run_problem(problem, curves_path);
  } catch (const sflow::Error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return sflow::io::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 3;
  }

  std::string text = run.result.dump(2);
  text.push_back('\n');
  if (output_path.empty()) {
    std::fwrite(text.data(), 1, text.size(), stdout);
  } else {
    std::ofstream out(output_path, std::ios::binary);
    if (!out) {
      std::fprintf(stderr, "cannot open output file: %s\n", output_path.c_str());
      return 3;
    }
    out << text;
  }
  return run.exit_code;
}
