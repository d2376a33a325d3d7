// Command implementations behind the `cfgsim` executable. Each command writes
// its report to `out`; failures surface as exceptions that run_guarded maps
// to exit codes.
#pragma once

#include "cfgsim/error.hpp"
#include "cfgsim/grading.hpp"
#include "cfgsim/neighbor_matching.hpp"

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace cfgsim::cli {

namespace fs = std::filesystem;

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kInputError = 2,
    kNumericError = 3,
};

/// Usage problems detected after argument parsing (e.g. conflicting options).
class UsageError : public Error {
  public:
    using Error::Error;
};

/// A grading manifest with every referenced program already parsed.
struct Manifest {
    std::string problem_id;
    std::vector<ModelSolution> model_solutions;
    std::vector<SubmissionRecord> submissions;
};

/// Reads a manifest; relative paths resolve against the manifest's directory.
/// Throws InputError for schema violations, missing files and duplicate ids,
/// ParseError for programs that do not parse.
Manifest load_manifest(const fs::path &path);

/// Reads `id,grade` lines (optional header) and overrides teacher grades.
void apply_grades_csv(Manifest &manifest, const fs::path &path);

Program load_program(const fs::path &path);

struct CompareOptions {
    EngineConfig engine;
    /// Compare the plain union of function graphs instead of the unified
    /// graph with its synthetic root.
    bool no_root = false;
    /// sim only: also pair each function of A with its best match in B.
    bool per_function = false;
};

/// The graph a comparison runs on, per CompareOptions::no_root.
Cfg comparison_graph(const Program &p, bool no_root);
std::vector<std::string> comparison_labels(const Program &p, bool no_root);

void cmd_sim(const fs::path &a, const fs::path &b, const CompareOptions &opts,
             std::ostream &out);
void cmd_match(const fs::path &a, const fs::path &b, const CompareOptions &opts,
               std::ostream &out);
void cmd_nearest(const fs::path &corpus_dir, const fs::path &target,
                 const CompareOptions &opts, std::size_t threads,
                 std::ostream &out);
/// Fits a model on the manifest's graded submissions and writes it to
/// `model_out`. The engine always runs in content mode.
void cmd_train(const fs::path &manifest, const std::optional<fs::path> &grades,
               const EngineConfig &engine, const fs::path &model_out,
               std::size_t threads, std::ostream &out);
/// Writes the grade CSV for every submission, in manifest order.
void cmd_grade(const fs::path &manifest, const fs::path &model,
               std::size_t threads, std::ostream &out);
void cmd_parse(const fs::path &file, bool print, std::ostream &out);

/// Runs `body`, printing any error to `err` and returning its exit code.
int run_guarded(const std::function<void()> &body, std::ostream &err);

/// Full command line entry point (argv[0] included).
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace cfgsim::cli
