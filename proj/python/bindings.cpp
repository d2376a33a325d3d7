#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cfgsim/assignment.hpp"
#include "cfgsim/content_sim.hpp"
#include "cfgsim/error.hpp"
#include "cfgsim/grading.hpp"
#include "cfgsim/ir.hpp"
#include "cfgsim/neighbor_matching.hpp"

#include <memory>

namespace py = pybind11;
using namespace cfgsim;

namespace {

using Rows = std::vector<std::vector<double>>;

Matrix to_matrix(const Rows &rows) {
    const std::size_t cols = rows.empty() ? 0 : rows.front().size();
    Matrix m(rows.size(), cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != cols)
            throw InputError("ragged weight matrix");
        for (std::size_t c = 0; c < cols; ++c)
            m(r, c) = rows[r][c];
    }
    return m;
}

Rows to_rows(const Matrix &m) {
    Rows rows(m.rows(), std::vector<double>(m.cols()));
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c)
            rows[r][c] = m(r, c);
    return rows;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Control flow graph similarity and automated grading";

    auto base = py::register_exception<Error>(m, "Error", PyExc_ValueError);
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<InputError>(m, "InputError", base.ptr());
    py::register_exception<NumericError>(m, "NumericError", base.ptr());

    py::class_<Instruction>(m, "Instruction")
        .def_readonly("opcode", &Instruction::opcode)
        .def_readonly("callee", &Instruction::callee)
        .def_readonly("operands", &Instruction::operands)
        .def_readonly("result", &Instruction::result)
        .def("__repr__", [](const Instruction &i) { return "<" + to_text(i) + ">"; });

    py::class_<BasicBlock>(m, "BasicBlock")
        .def_readonly("label", &BasicBlock::label)
        .def_readonly("body", &BasicBlock::body);

    py::class_<Cfg>(m, "Cfg")
        .def("__len__", &Cfg::size)
        .def_property_readonly("nodes", &Cfg::nodes)
        .def_property_readonly("edges", &Cfg::edges)
        .def_property_readonly("entry", &Cfg::entry)
        .def("in_degree", &Cfg::in_degree)
        .def("out_degree", &Cfg::out_degree);

    py::class_<Function>(m, "Function")
        .def_readonly("name", &Function::name)
        .def_readonly("cfg", &Function::cfg);

    py::class_<Program, std::shared_ptr<Program>>(m, "Program")
        .def_property_readonly("functions", &Program::functions)
        .def_property_readonly("unified", &Program::unified)
        .def_property_readonly("unified_labels", &unified_labels)
        .def("__eq__", [](const Program &a, const Program &b) { return a == b; });

    m.def("parse_program", [](const std::string &src) {
        return std::make_shared<Program>(parse_program(src));
    }, py::arg("source"));
    m.def("to_text", py::overload_cast<const Program &>(&to_text));

    m.def("subst_cost", &subst_cost);
    m.def("edit_distance", [](const std::vector<Instruction> &a,
                              const std::vector<Instruction> &b) {
        return edit_distance(a, b);
    });
    m.def("content_similarity", [](const std::vector<Instruction> &a,
                                   const std::vector<Instruction> &b) {
        return content_similarity(a, b);
    });

    py::class_<Matching>(m, "Matching")
        .def_readonly("pairs", &Matching::pairs)
        .def_readonly("weight", &Matching::weight);
    m.def("solve_max_assignment",
          [](const Rows &w) { return solve_max_assignment(to_matrix(w)); },
          py::arg("weights"));

    py::enum_<SimilarityMode>(m, "SimilarityMode")
        .value("TOPOLOGICAL", SimilarityMode::Topological)
        .value("CONTENT", SimilarityMode::Content);

    py::class_<EngineConfig>(m, "EngineConfig")
        .def(py::init([](double epsilon, int max_iters, SimilarityMode mode) {
                 EngineConfig c{epsilon, max_iters, mode};
                 c.validate();
                 return c;
             }),
             py::arg("epsilon") = 1e-4, py::arg("max_iters") = 100,
             py::arg("mode") = SimilarityMode::Content)
        .def_readwrite("epsilon", &EngineConfig::epsilon)
        .def_readwrite("max_iters", &EngineConfig::max_iters)
        .def_readwrite("mode", &EngineConfig::mode);

    py::class_<SimilarityMatrix>(m, "SimilarityMatrix")
        .def_property_readonly("x", [](const SimilarityMatrix &s) { return to_rows(s.x); })
        .def_readonly("iterations", &SimilarityMatrix::iterations)
        .def_readonly("converged", &SimilarityMatrix::converged)
        .def_readonly("epsilon", &SimilarityMatrix::epsilon);

    // Graph arguments accept a Program (its unified graph) or a bare Cfg.
    auto graph_of = [](const py::object &o) -> const Cfg & {
        if (py::isinstance<Program>(o))
            return o.cast<const Program &>().unified();
        return o.cast<const Cfg &>();
    };
    const EngineConfig defaults;

    m.def("iterate_similarity",
          [graph_of](const py::object &a, const py::object &b, const EngineConfig &c) {
              return iterate_similarity(graph_of(a), graph_of(b), c);
          },
          py::arg("a"), py::arg("b"), py::arg("config") = defaults);
    m.def("graph_similarity",
          [graph_of](const py::object &a, const py::object &b, const EngineConfig &c) {
              const GraphSimilarity g = graph_similarity(graph_of(a), graph_of(b), c);
              py::dict d;
              d["value"] = g.value;
              d["iterations"] = g.iterations;
              d["converged"] = g.converged;
              return d;
          },
          py::arg("a"), py::arg("b"), py::arg("config") = defaults);
    m.def("match_nodes",
          [graph_of](const py::object &a, const py::object &b, const EngineConfig &c) {
              const NodeMatchReport r = match_nodes(graph_of(a), graph_of(b), c);
              py::list pairs;
              for (const auto &p : r.pairs)
                  pairs.append(py::make_tuple(p.a, p.b, p.similarity));
              py::dict d;
              d["pairs"] = pairs;
              d["unmatched_a"] = r.unmatched_a;
              d["unmatched_b"] = r.unmatched_b;
              d["similarity"] = r.graph.value;
              d["converged"] = r.graph.converged;
              return d;
          },
          py::arg("a"), py::arg("b"), py::arg("config") = defaults);

    py::class_<GradeModel>(m, "GradeModel")
        .def(py::init([](std::array<double, 3> alpha) {
                 GradeModel g;
                 g.alpha = alpha;
                 return g;
             }),
             py::arg("alpha"))
        .def_readonly("alpha", &GradeModel::alpha)
        .def_readonly("trained_on", &GradeModel::trained_on)
        .def_readonly("train_mae", &GradeModel::train_mae)
        .def_readonly("train_r", &GradeModel::train_r);

    m.def("fit",
          [](const std::vector<std::pair<Features, double>> &rows) {
              std::vector<Observation> data;
              for (const auto &[x, y] : rows)
                  data.push_back({x, y});
              return fit(data);
          },
          py::arg("observations"), "Fit on [((x1, x2, x3), grade), ...]");
    m.def("predict",
          [](const GradeModel &g, double x1, bool x2, double x3) {
              const Prediction p = predict(g, x1, x2, x3);
              return py::make_tuple(p.raw, p.grade);
          },
          py::arg("model"), py::arg("x1"), py::arg("x2"), py::arg("x3"));
    m.def("rescale_x3", &rescale_x3, py::arg("x3"), py::arg("observed_min"));
    m.def("feedback_band",
          [](double x3) { return std::string(to_string(feedback_band(x3))); });
    m.def("compute_x3",
          [](const Program &submission,
             const std::vector<std::pair<std::string, std::shared_ptr<Program>>> &models,
             const EngineConfig &c) {
              std::vector<ModelSolution> sols;
              for (const auto &[id, p] : models)
                  sols.push_back({id, p});
              const SimilaritySignal s = compute_x3(submission, sols, c);
              return py::make_tuple(s.x3, s.best_model_id);
          },
          py::arg("submission"), py::arg("model_solutions"), py::arg("config") = defaults);
    m.def("model_to_json", &model_to_json);
    m.def("model_from_json", [](const std::string &s) { return model_from_json(s); });
}
