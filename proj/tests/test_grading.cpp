#include <doctest.h>

#include "cfgsim/error.hpp"
#include "cfgsim/grading.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

using namespace cfgsim;

namespace {

std::shared_ptr<const Program> load(const std::string &name) {
    std::ifstream in(std::string(CFGSIM_TEST_DATA) + "/" + name);
    std::ostringstream ss;
    ss << in.rdbuf();
    return std::make_shared<const Program>(parse_program(ss.str()));
}

GradeModel with_alpha(double a1, double a2, double a3) {
    GradeModel m;
    m.alpha = {a1, a2, a3};
    return m;
}

double sse(const std::array<double, 3> &alpha, const std::vector<Observation> &data) {
    double s = 0.0;
    for (const auto &o : data) {
        const double r = o.grade - predict_raw(alpha, o.x);
        s += r * r;
    }
    return s;
}

std::vector<Observation> random_design(std::mt19937_64 &rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    std::vector<Observation> data;
    for (std::size_t i = 0; i < n; ++i)
        data.push_back({{u(rng), coin(rng) ? 1.0 : 0.0, u(rng)}, 0.0});
    return data;
}

} // namespace

TEST_CASE("x3 is the best similarity over model solutions") {
    const auto sub = load("diamond.ir");
    const EngineConfig cfg;
    SUBCASE("identical model solution") {
        const std::vector<ModelSolution> models{{"other", load("two_funcs.ir")},
                                                {"same", load("diamond.ir")}};
        const SimilaritySignal s = compute_x3(*sub, models, cfg);
        CHECK(s.x3 == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(s.best_model_id == "same");
    }
    SUBCASE("single model solution") {
        const std::vector<ModelSolution> models{{"m", load("two_funcs.ir")}};
        const double pair =
            graph_similarity(sub->unified(), models[0].program->unified(), cfg).value;
        CHECK(compute_x3(*sub, models, cfg).x3 == pair);
    }
    SUBCASE("three model solutions") {
        const std::vector<ModelSolution> models{{"first", load("two_funcs.ir")},
                                                {"second", load("diamond_extra.ir")},
                                                {"third", load("chain2.ir")}};
        std::vector<double> sims;
        for (const auto &m : models)
            sims.push_back(graph_similarity(sub->unified(), m.program->unified(), cfg).value);
        // The extra-block diamond is the closest by construction.
        REQUIRE(sims[1] > sims[0]);
        REQUIRE(sims[1] > sims[2]);
        const SimilaritySignal s = compute_x3(*sub, models, cfg);
        CHECK(s.x3 == sims[1]);
        CHECK(s.best_model_id == "second");
    }
    SUBCASE("topological flag is overridden") {
        const std::vector<ModelSolution> models{{"m", load("diamond_extra.ir")}};
        EngineConfig topo = cfg;
        topo.mode = SimilarityMode::Topological;
        CHECK(compute_x3(*sub, models, topo).x3 == compute_x3(*sub, models, cfg).x3);
    }
    CHECK_THROWS_AS(compute_x3(*sub, {}, cfg), InputError);
}

TEST_CASE("select_best: ties keep the first, scaling keeps the argmax") {
    std::vector<ScoredModel> tied{{"a", 0.7}, {"b", 0.9}, {"c", 0.9}};
    CHECK(select_best(tied).best_model_id == "b");

    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<ScoredModel> scores;
        for (int k = 0; k < 1 + trial % 6; ++k)
            scores.push_back({"m" + std::to_string(k), u(rng)});
        const std::string best = select_best(scores).best_model_id;
        const double factor = 0.01 + u(rng) * 0.99;
        for (auto &s : scores)
            s.similarity *= factor;
        CHECK(select_best(scores).best_model_id == best);
    }
}

TEST_CASE("planted coefficients are recovered exactly") {
    std::mt19937_64 rng(1);
    auto data = random_design(rng, 50);
    for (auto &o : data)
        o.grade = 8 * o.x[0] + 1 * o.x[1] + 1 * o.x[2];
    const GradeModel m = fit(data);
    CHECK(std::abs(m.alpha[0] - 8) <= 1e-9);
    CHECK(std::abs(m.alpha[1] - 1) <= 1e-9);
    CHECK(std::abs(m.alpha[2] - 1) <= 1e-9);
    CHECK(m.trained_on == 50);
    CHECK(m.train_mae <= 1e-9);
    CHECK(m.train_r == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("three records form an exactly solvable system") {
    // Solved by hand: alpha = (12, 8, -10).
    const std::vector<Observation> data{{{1.0, 1.0, 1.0}, 10.0},
                                        {{1.0, 0.0, 0.5}, 7.0},
                                        {{0.5, 1.0, 0.8}, 6.0}};
    const GradeModel m = fit(data);
    CHECK(m.alpha[0] == doctest::Approx(12.0).epsilon(1e-12));
    CHECK(m.alpha[1] == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(m.alpha[2] == doctest::Approx(-10.0).epsilon(1e-12));
}

TEST_CASE("degenerate designs are reported") {
    auto message = [](const std::vector<Observation> &data) {
        try {
            fit(data);
        } catch (const NumericError &e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    // x1 and x2 both constant: proportional columns.
    const std::vector<Observation> constant{{{1, 1, 0.7}, 9}, {{1, 1, 0.8}, 9.5}, {{1, 1, 0.9}, 10}};
    CHECK(message(constant).find("x1, x2") != std::string::npos);
    const std::vector<Observation> zero{{{1, 0, 0.7}, 9}, {{0.5, 0, 0.8}, 9.5}, {{1, 0, 0.9}, 10}};
    CHECK(message(zero).find("x2 is identically zero") != std::string::npos);
    const std::vector<Observation> combo{{{0.2, 1, 1.2}, 9}, {{0.4, 0, 0.4}, 9.5}, {{0.6, 1, 1.6}, 10}};
    CHECK(message(combo).find("x1, x2, x3") != std::string::npos);

    CHECK_THROWS_AS(fit(std::vector<Observation>(2, {{1, 0, 1}, 5})), InputError);
}

TEST_CASE("feature masks fix excluded coefficients at zero") {
    std::mt19937_64 rng(2);
    auto data = random_design(rng, 40);
    for (auto &o : data)
        o.grade = 3 * o.x[2];
    const GradeModel m = fit(data, {false, false, true});
    CHECK(m.alpha[0] == 0.0);
    CHECK(m.alpha[1] == 0.0);
    CHECK(m.alpha[2] == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("property: fitted coefficients are a local least-squares optimum") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> noise(0.0, 0.5);
    for (int trial = 0; trial < 50; ++trial) {
        auto data = random_design(rng, 10 + trial);
        for (auto &o : data)
            o.grade = 6 * o.x[0] + 1 * o.x[1] + 3 * o.x[2] + noise(rng);
        const GradeModel m = fit(data);
        const double base = sse(m.alpha, data);
        for (int k = 0; k < 3; ++k) {
            for (double d : {-1e-3, 1e-3}) {
                auto alpha = m.alpha;
                alpha[k] += d;
                CHECK(sse(alpha, data) >= base);
            }
        }
    }
}

TEST_CASE("train uses the per-record signals") {
    std::vector<SubmissionRecord> records;
    std::vector<SimilaritySignal> signals;
    const double x3s[] = {0.7, 0.9, 0.8, 1.0, 0.75};
    for (int i = 0; i < 5; ++i) {
        SubmissionRecord r;
        r.id = "s" + std::to_string(i);
        r.tests_total = 4;
        r.tests_passed = i % 5;
        r.bug_free = i % 2 == 0;
        r.teacher_grade = 8.0 * r.x1() + r.x2() + x3s[i];
        records.push_back(r);
        signals.push_back({x3s[i], "m"});
    }
    const GradeModel m = train(records, signals);
    CHECK(m.alpha[0] == doctest::Approx(8.0).epsilon(1e-9));
    CHECK(m.alpha[1] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(m.alpha[2] == doctest::Approx(1.0).epsilon(1e-9));

    records[0].teacher_grade.reset();
    CHECK_THROWS_AS(train(records, signals), InputError);
    signals.pop_back();
    CHECK_THROWS_AS(train(records, signals), InputError);
}

TEST_CASE("submission record validation") {
    SubmissionRecord r;
    r.id = "x";
    r.tests_total = 0;
    CHECK_THROWS_AS(r.validate(), InputError);
    r.tests_total = 3;
    r.tests_passed = 4;
    CHECK_THROWS_AS(r.validate(), InputError);
    r.tests_passed = 3;
    r.teacher_grade = 10.5;
    CHECK_THROWS_AS(r.validate(), InputError);
    r.teacher_grade = 10.0;
    CHECK_NOTHROW(r.validate());
    CHECK(r.x1() == 1.0);
}

TEST_CASE("prediction") {
    CHECK(predict(with_alpha(8, 1, 1), 1, true, 1).grade == 10.0);
    const Prediction p = predict(with_alpha(6.058, 1.014, 2.919), 1, true, 1);
    CHECK(p.raw == doctest::Approx(9.991).epsilon(1e-12));
    CHECK(predict(with_alpha(8, 1, 1), 0, false, 0).grade == 0.0);

    const Prediction over = predict(with_alpha(9, 2, 2), 1, true, 1);
    CHECK(over.raw == 13.0);
    CHECK(over.grade == 10.0);
    const Prediction under = predict(with_alpha(-1, 0, 0), 1, false, 0);
    CHECK(under.raw == -1.0);
    CHECK(under.grade == 0.0);
}

TEST_CASE("property: prediction is increasing in each signal with positive weight") {
    const GradeModel m = with_alpha(0.6, 0.2, 0.3);
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double x1 = u(rng), x3 = u(rng);
        const bool x2 = trial % 2;
        const double base = predict(m, x1, x2, x3).raw;
        const double d = 1e-3 + u(rng) * 0.1;
        CHECK(predict(m, x1 + d, x2, x3).raw > base);
        CHECK(predict(m, x1, x2, x3 + d).raw > base);
        CHECK(predict(m, x1, true, x3).raw > predict(m, x1, false, x3).raw);
    }
}

TEST_CASE("x3 rescaling") {
    CHECK(rescale_x3(0.68, 0.68) == 0.0);
    CHECK(rescale_x3(1.0, 0.68) == 1.0);
    CHECK(rescale_x3(0.84, 0.68) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(rescale_x3(0.5, 0.68) == 0.0);
    CHECK_THROWS_AS(rescale_x3(0.9, 1.0), InputError);
    CHECK_THROWS_AS(rescale_x3(0.9, -0.1), InputError);
}

TEST_CASE("feedback bands") {
    CHECK(feedback_band(0.95) == Band::VerySimilar);
    CHECK(feedback_band(0.5) == Band::RoughlySimilar);
    CHECK(feedback_band(0.69999) == Band::RoughlySimilar);
    CHECK(feedback_band(0.0) == Band::Dissimilar);
    CHECK(feedback_band(std::nextafter(0.5, 0.0)) == Band::Dissimilar);
    CHECK(feedback_band(0.7) == Band::Similar);
    CHECK(feedback_band(0.9) == Band::VerySimilar);
    CHECK(feedback_band(1.0) == Band::VerySimilar);
    CHECK_THROWS_AS(feedback_band(1.0000001), InputError);
    CHECK_THROWS_AS(feedback_band(-0.1), InputError);
    CHECK_THROWS_AS(feedback_band(std::numeric_limits<double>::quiet_NaN()), InputError);
    CHECK(to_string(Band::RoughlySimilar) == "roughly_similar");
}

TEST_CASE("model file round-trip") {
    GradeModel m = with_alpha(6.058, 1.014, 2.919);
    m.trained_on = 177;
    m.train_mae = 0.25;
    m.train_r = 0.9;
    m.engine.epsilon = 1e-5;
    m.engine.max_iters = 50;
    const std::string text = model_to_json(m);
    const GradeModel back = model_from_json(text);
    CHECK(back.alpha == m.alpha);
    CHECK(back.trained_on == 177);
    CHECK(back.train_mae == 0.25);
    CHECK(back.engine.epsilon == 1e-5);
    CHECK(back.engine.max_iters == 50);
    CHECK(back.engine.mode == SimilarityMode::Content);
    CHECK(model_to_json(back) == text);

    CHECK_THROWS_AS(model_from_json("{"), InputError);
    CHECK_THROWS_AS(model_from_json(R"({"alpha": [1, 2]})"), InputError);
    CHECK_THROWS_AS(model_from_json(R"({"alpha": [1, 2, 3], "engine": {"epsilon": 2}})"),
                    InputError);
}
