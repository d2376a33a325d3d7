#include "cfgsim/cli.hpp"

#include "cfgsim/error.hpp"
#include "cfgsim/parallel.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <unordered_map>

namespace cfgsim::cli {

namespace {

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string read_file(const fs::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InputError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path &path, const std::string &content) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << content))
        throw InputError("cannot write '" + path.string() + "'");
}

fs::path resolve(const fs::path &base, const std::string &p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

std::shared_ptr<const Program> load_shared(const fs::path &path) {
    return std::make_shared<const Program>(load_program(path));
}

// x3 for every submission, computed in parallel, reported in manifest order.
std::vector<SimilaritySignal> signals_for(const Manifest &m,
                                          const EngineConfig &engine,
                                          std::size_t threads) {
    std::vector<SimilaritySignal> out(m.submissions.size());
    parallel_for(out.size(), threads, [&](std::size_t i) {
        out[i] = compute_x3(*m.submissions[i].program, m.model_solutions, engine);
    });
    return out;
}

} // namespace

Program load_program(const fs::path &path) {
    const std::string text = read_file(path);
    try {
        return parse_program(text);
    } catch (const ParseError &e) {
        throw ParseError(e.detail(), e.line(), e.column(), path.string());
    }
}

Manifest load_manifest(const fs::path &path) {
    const fs::path base = path.parent_path();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error &e) {
        throw InputError(path.string() + ": " + e.what());
    }
    Manifest m;
    try {
        m.problem_id = j.at("problem_id").get<std::string>();
        std::set<std::string> model_ids;
        for (const auto &entry : j.at("model_solutions")) {
            ModelSolution sol;
            std::string file;
            if (entry.is_string()) {
                file = entry.get<std::string>();
                sol.id = file;
            } else {
                file = entry.at("path").get<std::string>();
                sol.id = entry.value("id", file);
            }
            if (!model_ids.insert(sol.id).second)
                throw InputError("duplicate model solution id '" + sol.id + "'");
            sol.program = load_shared(resolve(base, file));
            m.model_solutions.push_back(std::move(sol));
        }
        std::set<std::string> ids;
        for (const auto &s : j.at("submissions")) {
            SubmissionRecord r;
            r.id = s.at("id").get<std::string>();
            if (!ids.insert(r.id).second)
                throw InputError("duplicate submission id '" + r.id + "'");
            if (!s.contains("bug_free"))
                throw InputError("submission '" + r.id + "' lacks bug_free");
            r.tests_passed = s.at("tests_passed").get<int>();
            r.tests_total = s.at("tests_total").get<int>();
            r.bug_free = s.at("bug_free").get<bool>();
            if (s.contains("teacher_grade") && !s.at("teacher_grade").is_null())
                r.teacher_grade = s.at("teacher_grade").get<double>();
            r.validate();
            r.program = load_shared(resolve(base, s.at("ir_path").get<std::string>()));
            m.submissions.push_back(std::move(r));
        }
    } catch (const nlohmann::json::exception &e) {
        throw InputError(path.string() + ": " + e.what());
    }
    if (m.model_solutions.empty())
        throw InputError(path.string() + ": no model solutions listed");
    return m;
}

void apply_grades_csv(Manifest &manifest, const fs::path &path) {
    std::unordered_map<std::string, SubmissionRecord *> by_id;
    for (auto &r : manifest.submissions)
        by_id[r.id] = &r;
    std::istringstream in(read_file(path));
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw InputError(path.string() + ":" + std::to_string(lineno) +
                             ": expected 'id,grade'");
        const std::string id = line.substr(0, comma);
        const std::string value = line.substr(comma + 1);
        if (lineno == 1 && id == "id")
            continue;
        auto it = by_id.find(id);
        if (it == by_id.end())
            throw InputError(path.string() + ": unknown submission '" + id + "'");
        try {
            it->second->teacher_grade = std::stod(value);
        } catch (const std::exception &) {
            throw InputError(path.string() + ":" + std::to_string(lineno) +
                             ": bad grade '" + value + "'");
        }
        it->second->validate();
    }
}

Cfg comparison_graph(const Program &p, bool no_root) {
    return no_root ? function_union(p.functions()) : p.unified();
}

std::vector<std::string> comparison_labels(const Program &p, bool no_root) {
    auto labels = unified_labels(p);
    if (no_root)
        labels.erase(labels.begin());
    return labels;
}

void cmd_sim(const fs::path &a, const fs::path &b, const CompareOptions &opts,
             std::ostream &out) {
    const Program pa = load_program(a), pb = load_program(b);
    const GraphSimilarity g =
        graph_similarity(comparison_graph(pa, opts.no_root),
                         comparison_graph(pb, opts.no_root), opts.engine);
    out << "similarity: " << fixed6(g.value) << '\n'
        << "mode: " << to_string(opts.engine.mode) << '\n'
        << "iterations: " << g.iterations << '\n'
        << "converged: " << (g.converged ? "true" : "false") << '\n';
    if (!opts.per_function)
        return;
    for (const auto &fa : pa.functions()) {
        const Function *best = nullptr;
        double best_value = -1.0;
        for (const auto &fb : pb.functions()) {
            const double v = graph_similarity(fa.cfg, fb.cfg, opts.engine).value;
            if (v > best_value) {
                best_value = v;
                best = &fb;
            }
        }
        out << "function " << fa.name << " -> " << best->name << ' '
            << fixed6(best_value) << '\n';
    }
}

void cmd_match(const fs::path &a, const fs::path &b, const CompareOptions &opts,
               std::ostream &out) {
    const Program pa = load_program(a), pb = load_program(b);
    const EngineConfig &engine = opts.engine;
    const NodeMatchReport r =
        match_nodes(comparison_graph(pa, opts.no_root),
                    comparison_graph(pb, opts.no_root), engine);
    const auto la = comparison_labels(pa, opts.no_root);
    const auto lb = comparison_labels(pb, opts.no_root);

    nlohmann::ordered_json j;
    j["similarity"] = r.graph.value;
    j["mode"] = std::string(to_string(engine.mode));
    j["iterations"] = r.graph.iterations;
    j["converged"] = r.graph.converged;
    auto pairs = nlohmann::ordered_json::array();
    for (const auto &p : r.pairs)
        pairs.push_back({{"a", la[p.a]}, {"b", lb[p.b]}, {"similarity", p.similarity}});
    j["pairs"] = std::move(pairs);
    auto unmatched = [](const std::vector<std::size_t> &idx,
                        const std::vector<std::string> &labels) {
        auto arr = nlohmann::ordered_json::array();
        for (std::size_t i : idx)
            arr.push_back(labels[i]);
        return arr;
    };
    j["unmatched_a"] = unmatched(r.unmatched_a, la);
    j["unmatched_b"] = unmatched(r.unmatched_b, lb);
    out << j.dump(2) << '\n';
}

void cmd_nearest(const fs::path &corpus_dir, const fs::path &target,
                 const CompareOptions &opts, std::size_t threads,
                 std::ostream &out) {
    if (!fs::is_directory(corpus_dir))
        throw InputError("'" + corpus_dir.string() + "' is not a directory");
    const Cfg tg = comparison_graph(load_program(target), opts.no_root);
    std::error_code ec;
    const fs::path target_abs = fs::weakly_canonical(target, ec);

    std::vector<fs::path> files;
    for (const auto &entry : fs::directory_iterator(corpus_dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".ir")
            continue;
        // The target itself is not its own neighbour.
        if (!ec && fs::weakly_canonical(entry.path()) == target_abs)
            continue;
        files.push_back(entry.path());
    }
    if (files.empty())
        throw InputError("corpus '" + corpus_dir.string() + "' has no .ir programs");
    std::sort(files.begin(), files.end());

    std::vector<double> sims(files.size());
    parallel_for(files.size(), threads, [&](std::size_t i) {
        const Cfg g = comparison_graph(load_program(files[i]), opts.no_root);
        sims[i] = graph_similarity(tg, g, opts.engine).value;
    });
    std::vector<std::size_t> order(files.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return sims[x] > sims[y]; });
    for (std::size_t rank = 0; rank < order.size(); ++rank)
        out << rank + 1 << ' ' << fixed6(sims[order[rank]]) << ' '
            << files[order[rank]].filename().string() << '\n';
}

void cmd_train(const fs::path &manifest, const std::optional<fs::path> &grades,
               const EngineConfig &engine, const fs::path &model_out,
               std::size_t threads, std::ostream &out) {
    Manifest m = load_manifest(manifest);
    if (grades)
        apply_grades_csv(m, *grades);
    for (const auto &r : m.submissions)
        if (!r.teacher_grade)
            throw InputError("submission '" + r.id + "' has no teacher grade");
    EngineConfig content = engine;
    content.mode = SimilarityMode::Content;
    const auto signals = signals_for(m, content, threads);
    GradeModel model = train(m.submissions, signals);
    model.engine = content;
    write_file(model_out, model_to_json(model));
    out << "trained on " << model.trained_on << " submissions\n"
        << "alpha: " << fixed6(model.alpha[0]) << ' ' << fixed6(model.alpha[1])
        << ' ' << fixed6(model.alpha[2]) << '\n'
        << "train_mae: " << fixed6(model.train_mae) << '\n'
        << "train_r: " << fixed6(model.train_r) << '\n';
}

void cmd_grade(const fs::path &manifest, const fs::path &model_path,
               std::size_t threads, std::ostream &out) {
    const Manifest m = load_manifest(manifest);
    const GradeModel model = model_from_json(read_file(model_path));
    EngineConfig content = model.engine;
    content.mode = SimilarityMode::Content;
    const auto signals = signals_for(m, content, threads);

    out << "id,x1,x2,x3,best_model_id,band,raw,grade\n";
    for (std::size_t i = 0; i < m.submissions.size(); ++i) {
        const auto &r = m.submissions[i];
        const auto &s = signals[i];
        const Prediction p = predict(model, r.x1(), r.bug_free, s.x3);
        out << r.id << ',' << fixed6(r.x1()) << ',' << (r.bug_free ? 1 : 0) << ','
            << fixed6(s.x3) << ',' << s.best_model_id << ','
            << to_string(feedback_band(s.x3)) << ',' << fixed6(p.raw) << ','
            << fixed6(p.grade) << '\n';
    }
}

void cmd_parse(const fs::path &file, bool print, std::ostream &out) {
    const Program p = load_program(file);
    if (print) {
        out << to_text(p);
        return;
    }
    std::size_t blocks = 0, edges = 0;
    for (const auto &f : p.functions()) {
        blocks += f.cfg.size();
        edges += f.cfg.edges().size();
    }
    out << "ok: " << p.functions().size() << " functions, " << blocks
        << " blocks, " << edges << " edges, unified graph "
        << p.unified().size() << " nodes\n";
}

int run_guarded(const std::function<void()> &body, std::ostream &err) {
    try {
        body();
        return kOk;
    } catch (const UsageError &e) {
        err << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const ParseError &e) {
        err << "parse error: " << e.what() << '\n';
        return kInputError;
    } catch (const InputError &e) {
        err << "input error: " << e.what() << '\n';
        return kInputError;
    } catch (const NumericError &e) {
        err << "numeric error: " << e.what() << '\n';
        return kNumericError;
    } catch (const fs::filesystem_error &e) {
        err << "input error: " << e.what() << '\n';
        return kInputError;
    }
}

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    CLI::App app{"Control flow graph similarity and automated grading"};
    app.require_subcommand(1);

    CompareOptions compare;
    EngineConfig &engine = compare.engine;
    std::string mode = "content";
    auto engine_flags = [&](CLI::App *sub, bool with_mode) {
        sub->add_option("--epsilon", engine.epsilon, "Convergence threshold")
            ->capture_default_str();
        sub->add_option("--max-iters", engine.max_iters, "Iteration cap")
            ->capture_default_str();
        if (!with_mode)
            return;
        sub->add_option("--mode", mode, "content or topo")
            ->check(CLI::IsMember({"content", "topo", "topological"}))
            ->capture_default_str();
        sub->add_flag("--no-root", compare.no_root,
                      "Compare function graphs without the synthetic root");
    };
    const std::size_t threads = thread_count();
    std::function<void()> action;

    fs::path a, b, dir, target, manifest, model, model_out, csv_out, file;
    std::optional<std::string> grades;
    bool print = false;

    auto *sim = app.add_subcommand("sim", "Similarity of two programs");
    sim->add_option("a", a)->required();
    sim->add_option("b", b)->required();
    sim->add_flag("--per-function", compare.per_function,
                  "Also pair each function of A with its most similar one in B");
    engine_flags(sim, true);
    sim->callback([&] {
        action = [&] { cmd_sim(a, b, compare, out); };
    });

    auto *match = app.add_subcommand("match", "Node matching report (JSON)");
    match->add_option("a", a)->required();
    match->add_option("b", b)->required();
    engine_flags(match, true);
    match->callback([&] { action = [&] { cmd_match(a, b, compare, out); }; });

    auto *nearest = app.add_subcommand("nearest", "Rank a corpus by similarity");
    nearest->add_option("corpus_dir", dir)->required();
    nearest->add_option("target", target)->required();
    engine_flags(nearest, true);
    nearest->callback([&] {
        action = [&] { cmd_nearest(dir, target, compare, threads, out); };
    });

    auto *trn = app.add_subcommand("train", "Fit the grade model");
    trn->add_option("manifest", manifest)->required();
    trn->add_option("--grades", grades, "CSV of id,grade overriding the manifest");
    trn->add_option("-o,--output", model_out, "Model file")->default_val("model.json");
    engine_flags(trn, false);
    trn->callback([&] {
        action = [&] {
            std::optional<fs::path> g;
            if (grades)
                g = *grades;
            cmd_train(manifest, g, engine, model_out, threads, out);
        };
    });

    auto *grd = app.add_subcommand("grade", "Grade submissions with a model");
    grd->add_option("manifest", manifest)->required();
    grd->add_option("model", model)->required();
    grd->add_option("-o,--output", csv_out, "CSV destination (default stdout)");
    grd->callback([&] {
        action = [&] {
            if (csv_out.empty()) {
                cmd_grade(manifest, model, threads, out);
            } else {
                std::ostringstream csv;
                cmd_grade(manifest, model, threads, csv);
                write_file(csv_out, csv.str());
            }
        };
    });

    auto *prs = app.add_subcommand("parse", "Parse and validate a program");
    prs->add_option("file", file)->required();
    prs->add_flag("--print", print, "Print the canonical form");
    prs->callback([&] { action = [&] { cmd_parse(file, print, out); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp &) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError &e) {
        err << "usage error: " << e.what() << '\n';
        return kUsage;
    }
    return run_guarded(
        [&] {
            engine.mode = parse_mode(mode);
            try {
                engine.validate();
            } catch (const InputError &e) {
                throw UsageError(e.what());
            }
            action();
        },
        err);
}

} // namespace cfgsim::cli
