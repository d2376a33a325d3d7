#include "cfgsim/grading.hpp"

#include "cfgsim/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cfgsim {

void SubmissionRecord::validate() const {
    if (tests_total < 1)
        throw InputError(id + ": tests_total must be at least 1");
    if (tests_passed < 0 || tests_passed > tests_total)
        throw InputError(id + ": tests_passed must lie in [0, tests_total]");
    if (teacher_grade && !(*teacher_grade >= 0.0 && *teacher_grade <= 10.0))
        throw InputError(id + ": teacher_grade must lie in [0, 10]");
}

SimilaritySignal compute_x3(const Program &submission,
                            std::span<const ModelSolution> model_solutions,
                            const EngineConfig &cfg) {
    if (model_solutions.empty())
        throw InputError("at least one model solution is required");
    EngineConfig content = cfg;
    content.mode = SimilarityMode::Content;

    std::vector<ScoredModel> scores;
    for (const auto &m : model_solutions)
        scores.push_back({m.id, graph_similarity(submission.unified(),
                                                 m.program->unified(), content)
                                    .value});
    return select_best(scores);
}

SimilaritySignal select_best(std::span<const ScoredModel> scores) {
    if (scores.empty())
        throw InputError("at least one model solution is required");
    const ScoredModel *best = &scores.front();
    for (const auto &s : scores)
        if (s.similarity > best->similarity)
            best = &s;
    return {best->similarity, best->id};
}

namespace {

constexpr double kPivotThreshold = 1e-10;

std::string column_names(const std::vector<std::size_t> &cols) {
    std::string out;
    for (std::size_t k = 0; k < cols.size(); ++k) {
        if (k)
            out += ", ";
        out += "x" + std::to_string(cols[k] + 1);
    }
    return out;
}

// Solves G b = rhs in place (G symmetric, small). Returns false when a pivot
// falls below the threshold.
bool solve_pivoted(std::vector<std::vector<double>> g, std::vector<double> rhs,
                   std::vector<double> &solution) {
    const std::size_t n = rhs.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(g[r][col]) > std::abs(g[piv][col]))
                piv = r;
        if (std::abs(g[piv][col]) < kPivotThreshold)
            return false;
        std::swap(g[piv], g[col]);
        std::swap(rhs[piv], rhs[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = g[r][col] / g[col][col];
            for (std::size_t c = col; c < n; ++c)
                g[r][c] -= f * g[col][c];
            rhs[r] -= f * rhs[col];
        }
    }
    solution.assign(n, 0.0);
    for (std::size_t r = n; r-- > 0;) {
        double acc = rhs[r];
        for (std::size_t c = r + 1; c < n; ++c)
            acc -= g[r][c] * solution[c];
        solution[r] = acc / g[r][r];
    }
    return true;
}

// Gram matrix of unit-normalised columns `cols`.
std::vector<std::vector<double>> gram(const std::vector<std::vector<double>> &z,
                                      const std::vector<std::size_t> &cols) {
    std::vector<std::vector<double>> g(cols.size(),
                                       std::vector<double>(cols.size()));
    for (std::size_t p = 0; p < cols.size(); ++p)
        for (std::size_t q = 0; q < cols.size(); ++q)
            g[p][q] = std::inner_product(z[cols[p]].begin(), z[cols[p]].end(),
                                         z[cols[q]].begin(), 0.0);
    return g;
}

// Smallest subset of the active columns whose Gram matrix is singular.
std::vector<std::size_t>
dependent_columns(const std::vector<std::vector<double>> &z,
                  const std::vector<std::size_t> &active) {
    std::vector<double> ignored;
    for (std::size_t p = 0; p < active.size(); ++p) {
        for (std::size_t q = p + 1; q < active.size(); ++q) {
            std::vector<std::size_t> pair{active[p], active[q]};
            if (!solve_pivoted(gram(z, pair), {0.0, 0.0}, ignored))
                return pair;
        }
    }
    return active;
}

} // namespace

GradeModel fit(std::span<const Observation> data, const FeatureMask &mask) {
    if (data.size() < 3)
        throw InputError("training needs at least 3 graded records");
    std::vector<std::size_t> active;
    for (std::size_t k = 0; k < 3; ++k)
        if (mask[k])
            active.push_back(k);
    if (active.empty())
        throw InputError("no features selected");

    // Columns scaled to unit norm keep the pivot threshold scale-free.
    std::vector<std::vector<double>> z(3, std::vector<double>(data.size()));
    std::array<double, 3> norm{};
    for (std::size_t k : active) {
        double ss = 0.0;
        for (std::size_t r = 0; r < data.size(); ++r) {
            if (!std::isfinite(data[r].x[k]) || !std::isfinite(data[r].grade))
                throw InputError("non-finite training value");
            ss += data[r].x[k] * data[r].x[k];
        }
        norm[k] = std::sqrt(ss);
        if (norm[k] == 0.0)
            throw NumericError("rank-deficient design: column x" +
                               std::to_string(k + 1) + " is identically zero");
        for (std::size_t r = 0; r < data.size(); ++r)
            z[k][r] = data[r].x[k] / norm[k];
    }

    std::vector<double> rhs(active.size(), 0.0);
    for (std::size_t p = 0; p < active.size(); ++p)
        for (std::size_t r = 0; r < data.size(); ++r)
            rhs[p] += z[active[p]][r] * data[r].grade;

    std::vector<double> beta;
    if (!solve_pivoted(gram(z, active), rhs, beta))
        throw NumericError("rank-deficient design: columns " +
                           column_names(dependent_columns(z, active)) +
                           " are linearly dependent");

    GradeModel model;
    for (std::size_t p = 0; p < active.size(); ++p)
        model.alpha[active[p]] = beta[p] / norm[active[p]];
    model.trained_on = data.size();
    const FitStats stats = evaluate(model.alpha, data);
    model.train_mae = stats.mae;
    model.train_r = stats.r;
    return model;
}

GradeModel train(std::span<const SubmissionRecord> records,
                 std::span<const SimilaritySignal> signals) {
    if (records.size() != signals.size())
        throw InputError("one similarity signal is needed per record");
    std::vector<Observation> data;
    data.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto &r = records[i];
        r.validate();
        if (!r.teacher_grade)
            throw InputError(r.id + ": missing teacher_grade");
        data.push_back({{r.x1(), r.x2(), signals[i].x3}, *r.teacher_grade});
    }
    return fit(data);
}

double predict_raw(const std::array<double, 3> &alpha, const Features &x) {
    return alpha[0] * x[0] + alpha[1] * x[1] + alpha[2] * x[2];
}

Prediction predict(const GradeModel &model, double x1, bool x2, double x3) {
    const double raw = predict_raw(model.alpha, {x1, x2 ? 1.0 : 0.0, x3});
    return {raw, std::clamp(raw, 0.0, 10.0)};
}

double rescale_x3(double x3, double observed_min) {
    if (!(observed_min >= 0.0 && observed_min < 1.0))
        throw InputError("observed_min must lie in [0, 1)");
    return std::clamp((x3 - observed_min) / (1.0 - observed_min), 0.0, 1.0);
}

Band feedback_band(double x3) {
    if (!(x3 >= 0.0 && x3 <= 1.0))
        throw InputError("similarity must lie in [0, 1]");
    if (x3 < 0.5)
        return Band::Dissimilar;
    if (x3 < 0.7)
        return Band::RoughlySimilar;
    if (x3 < 0.9)
        return Band::Similar;
    return Band::VerySimilar;
}

std::string_view to_string(Band band) noexcept {
    switch (band) {
    case Band::Dissimilar:
        return "dissimilar";
    case Band::RoughlySimilar:
        return "roughly_similar";
    case Band::Similar:
        return "similar";
    case Band::VerySimilar:
        return "very_similar";
    }
    return "unknown";
}

FitStats evaluate(const std::array<double, 3> &alpha,
                  std::span<const Observation> data) {
    FitStats s;
    if (data.empty())
        return s;
    const double n = static_cast<double>(data.size());
    double mp = 0.0, my = 0.0;
    for (const auto &o : data) {
        const double p = predict_raw(alpha, o.x);
        s.mae += std::abs(p - o.grade);
        mp += p;
        my += o.grade;
    }
    s.mae /= n;
    mp /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (const auto &o : data) {
        const double dp = predict_raw(alpha, o.x) - mp;
        const double dy = o.grade - my;
        sxy += dp * dy;
        sxx += dp * dp;
        syy += dy * dy;
    }
    // Undefined for a constant series; reported as 0.
    s.r = (sxx > 0.0 && syy > 0.0) ? sxy / std::sqrt(sxx * syy) : 0.0;
    return s;
}

std::string model_to_json(const GradeModel &model) {
    nlohmann::ordered_json j;
    j["alpha"] = model.alpha;
    j["trained_on"] = model.trained_on;
    j["train_mae"] = model.train_mae;
    j["train_r"] = model.train_r;
    j["engine"] = {{"epsilon", model.engine.epsilon},
                   {"max_iters", model.engine.max_iters},
                   {"mode", std::string(to_string(model.engine.mode))}};
    return j.dump(2) + "\n";
}

GradeModel model_from_json(std::string_view text) {
    try {
        const auto j = nlohmann::json::parse(text);
        GradeModel m;
        const auto &alpha = j.at("alpha");
        if (!alpha.is_array() || alpha.size() != 3)
            throw InputError("model file: 'alpha' must hold three numbers");
        for (std::size_t k = 0; k < 3; ++k)
            m.alpha[k] = alpha.at(k).get<double>();
        m.trained_on = j.value("trained_on", std::size_t{0});
        m.train_mae = j.value("train_mae", 0.0);
        m.train_r = j.value("train_r", 0.0);
        if (j.contains("engine")) {
            const auto &e = j.at("engine");
            m.engine.epsilon = e.value("epsilon", m.engine.epsilon);
            m.engine.max_iters = e.value("max_iters", m.engine.max_iters);
            m.engine.mode = parse_mode(e.value("mode", std::string("content")));
            m.engine.validate();
        }
        return m;
    } catch (const nlohmann::json::exception &e) {
        throw InputError(std::string("model file: ") + e.what());
    }
}

} // namespace cfgsim
