#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>

#include "incdsi/errors.hpp"
#include "incdsi/incremental.hpp"
#include "incdsi/io.hpp"
#include "incdsi/metrics.hpp"

namespace py = pybind11;

namespace {

using incdsi::Matrix;
using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const FloatArray& a) {
  if (a.ndim() == 1) {
    return Matrix(1, static_cast<std::size_t>(a.shape(0)),
                  std::vector<float>(a.data(), a.data() + a.size()));
  }
  if (a.ndim() != 2) throw incdsi::ShapeError("expected a 1-d or 2-d float array");
  return Matrix(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)),
                std::vector<float>(a.data(), a.data() + a.size()));
}

std::vector<float> to_vector(const FloatArray& a) {
  if (a.ndim() != 1) throw incdsi::ShapeError("expected a 1-d float array");
  return {a.data(), a.data() + a.size()};
}

py::array_t<float> to_array(const Matrix& m) {
  py::array_t<float> out({m.rows(), m.cols()});
  if (!m.empty()) std::memcpy(out.mutable_data(), m.data().data(), m.data().size() * sizeof(float));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Core bindings for incremental document indexing";

  auto base = py::register_exception<incdsi::Error>(m, "Error");
  py::register_exception<incdsi::ShapeError>(m, "ShapeError", base);
  py::register_exception<incdsi::DuplicateIdError>(m, "DuplicateIdError", base);
  py::register_exception<incdsi::NotFoundError>(m, "NotFoundError", base);
  py::register_exception<incdsi::FormatError>(m, "FormatError", base);
  py::register_exception<incdsi::InvalidArgument>(m, "InvalidArgument", base);

  py::enum_<incdsi::LossVariant>(m, "LossVariant")
      .value("squared_hinge", incdsi::LossVariant::squared_hinge)
      .value("hinge", incdsi::LossVariant::hinge);

  py::class_<incdsi::Hyperparams>(m, "Hyperparams")
      .def(py::init([](double lambda1, double lambda2, double gamma1, double gamma2,
                       incdsi::LossVariant variant) {
             incdsi::Hyperparams hp{lambda1, lambda2, gamma1, gamma2, variant};
             hp.validate();
             return hp;
           }),
           py::arg("lambda1") = 0.5, py::arg("lambda2") = 1e-5, py::arg("gamma1") = 1.0,
           py::arg("gamma2") = 1.0, py::arg("loss_variant") = incdsi::LossVariant::squared_hinge)
      .def_readwrite("lambda1", &incdsi::Hyperparams::lambda1)
      .def_readwrite("lambda2", &incdsi::Hyperparams::lambda2)
      .def_readwrite("gamma1", &incdsi::Hyperparams::gamma1)
      .def_readwrite("gamma2", &incdsi::Hyperparams::gamma2)
      .def_readwrite("loss_variant", &incdsi::Hyperparams::loss_variant)
      .def("__eq__", [](const incdsi::Hyperparams& a, const incdsi::Hyperparams& b) { return a == b; })
      .def("__repr__", [](const incdsi::Hyperparams& hp) {
        return "Hyperparams(lambda1=" + std::to_string(hp.lambda1) +
               ", lambda2=" + std::to_string(hp.lambda2) + ", gamma1=" + std::to_string(hp.gamma1) +
               ", gamma2=" + std::to_string(hp.gamma2) + ", loss_variant=" +
               incdsi::to_string(hp.loss_variant) + ")";
      });

  py::class_<incdsi::AddOptions>(m, "AddOptions")
      .def(py::init([](const incdsi::Hyperparams& hp, std::uint64_t seed, int max_restarts,
                       int max_iterations) {
             incdsi::AddOptions o;
             o.hp = hp;
             o.seed = seed;
             o.max_restarts = max_restarts;
             o.optimizer.max_iterations = max_iterations;
             return o;
           }),
           py::arg("hp") = incdsi::Hyperparams{}, py::arg("seed") = 0,
           py::arg("max_restarts") = incdsi::kDefaultMaxRestarts, py::arg("max_iterations") = 30)
      .def_readwrite("hp", &incdsi::AddOptions::hp)
      .def_readwrite("seed", &incdsi::AddOptions::seed)
      .def_readwrite("max_restarts", &incdsi::AddOptions::max_restarts);

  py::class_<incdsi::AddReport>(m, "AddReport")
      .def_readonly("doc_id", &incdsi::AddReport::doc_id)
      .def_readonly("row", &incdsi::AddReport::row)
      .def_readonly("feasible", &incdsi::AddReport::feasible)
      .def_readonly("iterations", &incdsi::AddReport::iterations)
      .def_readonly("total_iterations", &incdsi::AddReport::total_iterations)
      .def_readonly("restarts", &incdsi::AddReport::restarts)
      .def_readonly("converged_by_tol", &incdsi::AddReport::converged_by_tol)
      .def_readonly("final_loss", &incdsi::AddReport::final_loss)
      .def_readonly("new_margin", &incdsi::AddReport::new_margin)
      .def_readonly("min_old_margin", &incdsi::AddReport::min_old_margin)
      .def_readonly("wall_millis", &incdsi::AddReport::wall_millis);

  py::class_<incdsi::IndexState>(m, "Index")
      .def(py::init([](const FloatArray& doc_vectors, const FloatArray& rep_queries,
                       std::vector<std::string> ids) {
             return incdsi::IndexState(to_matrix(doc_vectors), to_matrix(rep_queries),
                                       std::move(ids));
           }),
           py::arg("doc_vectors"), py::arg("rep_queries"), py::arg("ids"))
      .def("__len__", &incdsi::IndexState::size)
      .def_property_readonly("dim", &incdsi::IndexState::dim)
      .def_property_readonly("n0", &incdsi::IndexState::n0)
      .def_property_readonly("ids", &incdsi::IndexState::ids)
      .def("__contains__", [](const incdsi::IndexState& s, const std::string& id) { return s.contains(id); })
      .def("doc_vectors", [](const incdsi::IndexState& s) { return to_array(s.doc_matrix()); })
      .def("rep_queries", [](const incdsi::IndexState& s) { return to_array(s.query_matrix()); })
      .def("copy", [](const incdsi::IndexState& s) { return incdsi::IndexState(s); })
      .def(
          "search",
          [](const incdsi::IndexState& s, const FloatArray& query, std::size_t k) {
            const auto r = incdsi::top_k(s.view(), to_vector(query), k);
            py::list out;
            for (const auto& h : r.entries) out.append(py::make_tuple(h.doc_id, h.score));
            return out;
          },
          py::arg("query"), py::arg("k") = 10);

  m.def(
      "add_document",
      [](incdsi::IndexState& s, const std::string& doc_id, const FloatArray& queries,
         const incdsi::AddOptions& options) {
        const Matrix q = to_matrix(queries);
        py::gil_scoped_release release;
        return incdsi::add_document(s, doc_id, q, options);
      },
      py::arg("index"), py::arg("doc_id"), py::arg("queries"),
      py::arg("options") = incdsi::AddOptions{},
      "Optimize a vector for a new document and append it. Returns an AddReport.");

  m.def(
      "check_feasibility",
      [](const incdsi::IndexState& s, const FloatArray& v, const FloatArray& q_bar) {
        const auto f = incdsi::check_feasibility(s.view(), to_vector(v), to_vector(q_bar));
        return py::make_tuple(f.feasible, f.new_margin, f.min_old_margin);
      },
      py::arg("index"), py::arg("v"), py::arg("q_bar"),
      "Returns (feasible, new_margin, min_old_margin) for a candidate against every row.");

  m.def("f_beta_target", &incdsi::f_beta_target, py::arg("y_tune"), py::arg("y_orig"),
        py::arg("beta"));

  m.def(
      "save_snapshot",
      [](const incdsi::IndexState& s, const incdsi::Hyperparams& hp, const std::filesystem::path& p) {
        incdsi::io::save_snapshot(s, hp, p);
      },
      py::arg("index"), py::arg("hp"), py::arg("path"));
  m.def(
      "load_snapshot",
      [](const std::filesystem::path& p) {
        auto [state, hp] = incdsi::io::load_snapshot(p);
        return py::make_tuple(std::move(state), hp);
      },
      py::arg("path"));
}
