// Linear grade model over three signals:
//   x1  fraction of tests passed
//   x2  1 if the verifier reported no bugs, else 0
//   x3  best structural similarity to a teacher solution
// grade = a1*x1 + a2*x2 + a3*x3, no intercept, fitted by least squares.
#pragma once

#include "cfgsim/ir.hpp"
#include "cfgsim/neighbor_matching.hpp"

#include <array>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cfgsim {

struct SubmissionRecord {
    std::string id;
    std::shared_ptr<const Program> program;
    int tests_passed = 0;
    int tests_total = 1;
    bool bug_free = false;
    std::optional<double> teacher_grade;

    /// Throws InputError unless 0 <= passed <= total, total >= 1 and any
    /// teacher grade lies in [0, 10].
    void validate() const;
    double x1() const { return static_cast<double>(tests_passed) / tests_total; }
    double x2() const { return bug_free ? 1.0 : 0.0; }
};

struct ModelSolution {
    std::string id;
    std::shared_ptr<const Program> program;
};

struct SimilaritySignal {
    double x3 = 0.0;
    std::string best_model_id;
};

struct ScoredModel {
    std::string id;
    double similarity;
};

/// Highest-scoring entry; ties keep the earliest. Throws InputError when empty.
SimilaritySignal select_best(std::span<const ScoredModel> scores);

/// Highest content-mode similarity between the submission's unified graph and
/// each model solution's; ties keep the earliest solution. Only epsilon and
/// max_iters are taken from `cfg`. Throws InputError for an empty list.
SimilaritySignal compute_x3(const Program &submission,
                            std::span<const ModelSolution> model_solutions,
                            const EngineConfig &cfg);

using Features = std::array<double, 3>;

struct Observation {
    Features x;
    double grade;
};

struct GradeModel {
    std::array<double, 3> alpha{};
    std::size_t trained_on = 0;
    double train_mae = 0.0;
    double train_r = 0.0;
    EngineConfig engine;
};

/// Which of x1, x2, x3 a fit may use; excluded coefficients are fixed at 0.
using FeatureMask = std::array<bool, 3>;
inline constexpr FeatureMask kAllFeatures{true, true, true};

/// Least squares through the normal equations with partial pivoting on
/// column-scaled data. Throws InputError for fewer than 3 observations and
/// NumericError naming the dependent columns when the design is rank
/// deficient.
GradeModel fit(std::span<const Observation> data,
               const FeatureMask &mask = kAllFeatures);

/// Fits on records that all carry a teacher grade, with x3 taken from the
/// signal at the same position.
GradeModel train(std::span<const SubmissionRecord> records,
                 std::span<const SimilaritySignal> signals);

struct Prediction {
    double raw;
    /// raw clamped to [0, 10].
    double grade;
};

Prediction predict(const GradeModel &model, double x1, bool x2, double x3);
double predict_raw(const std::array<double, 3> &alpha, const Features &x);

/// (x3 - observed_min) / (1 - observed_min), clamped to [0, 1]. Reporting
/// only; models are fitted on raw x3.
double rescale_x3(double x3, double observed_min);

enum class Band { Dissimilar, RoughlySimilar, Similar, VerySimilar };

/// [0,0.5) dissimilar, [0.5,0.7) roughly similar, [0.7,0.9) similar,
/// [0.9,1] very similar. Throws InputError outside [0, 1].
Band feedback_band(double x3);
std::string_view to_string(Band band) noexcept;

/// Mean absolute error and Pearson correlation of predictions vs. grades.
struct FitStats {
    double mae = 0.0;
    double r = 0.0;
};
FitStats evaluate(const std::array<double, 3> &alpha,
                  std::span<const Observation> data);

// Model file (JSON).
std::string model_to_json(const GradeModel &model);
/// Throws InputError on malformed content.
GradeModel model_from_json(std::string_view text);

} // namespace cfgsim
