#include "wass/bounds.hpp"
#include "wass/class_weights.hpp"
#include "wass/error.hpp"
#include "wass/ot.hpp"
#include "wass/pipeline.hpp"
#include "wass/select.hpp"
#include "wass/sinkhorn.hpp"
#include "wass/synth.hpp"
#include "wass/verify.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace wass;

namespace {

py::dict solution_dict(const ClassWeightSolution& s) {
  py::dict d;
  d["weights"] = s.weights.values();
  d["plan"] = s.plan.plan;
  d["objective"] = s.objective;
  d["dual_objective"] = s.dual_objective;
  d["duality_gap"] = s.duality_gap;
  d["support_size"] = s.support_size;
  d["iterations"] = s.iterations;
  d["converged"] = s.converged;
  d["solver"] = s.solver;
  d["warnings"] = s.warnings;
  return d;
}

LabeledDataset dataset(const Matrix& x, const std::vector<ClassId>& labels) {
  return LabeledDataset(FeatureMatrix(x), densify_labels(labels));
}

py::tuple dataset_tuple(const LabeledDataset& d) { return py::make_tuple(d.features().values(), d.original_labels()); }

ClassPartition partition(const std::vector<std::size_t>& counts) { return ClassPartition::from_counts(counts); }

py::dict bound_dict(const BoundReport& b) {
  py::dict d;
  d["eps_source"] = b.eps_source;
  d["eps_target"] = b.eps_target;
  d["eps_target_zero_one"] = b.eps_target_zero_one;
  d["w1_marginal"] = b.w1_marginal;
  d["w1_joint"] = b.w1_joint;
  d["cond_term_source"] = b.cond_term_source ? py::object(py::float_(*b.cond_term_source)) : py::object(py::none());
  d["cond_term_target"] = b.cond_term_target ? py::object(py::float_(*b.cond_term_target)) : py::object(py::none());
  d["rho_hat"] = b.rho_hat;
  d["rho_upper"] = b.rho_upper;
  d["alpha"] = b.alpha;
  d["beta"] = b.beta;
  d["sigma_max_diff"] = b.sigma_max_diff;
  d["bound_value"] = b.bound_value;
  d["holds"] = b.holds;
  d["lambda_hat"] = b.lambda_hat;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Class-weight selection by Wasserstein distance";
  m.attr("__version__") = WASS_VERSION;

  static py::exception<Error> error(m, "WassError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  m.def(
      "pairwise_distances",
      [](const Matrix& a, const Matrix& b) { return pairwise_distances(FeatureMatrix(a), FeatureMatrix(b)).values(); },
      py::arg("source"), py::arg("target"), "Euclidean distances, source rows x target rows.");

  m.def(
      "exact_ot",
      [](const Matrix& cost, const Vector& mu, const Vector& nu) {
        OtResult r = solve_exact_ot({cost, mu, nu});
        py::dict d;
        d["plan"] = r.plan.plan;
        d["objective"] = r.plan.objective;
        d["dual_objective"] = r.dual_objective;
        d["duality_gap"] = r.duality_gap;
        return d;
      },
      py::arg("cost"), py::arg("mu"), py::arg("nu"), "Exact discrete optimal transport.");

  m.def(
      "solve_class_weights",
      [](const Matrix& D, const std::vector<std::size_t>& counts) {
        return solution_dict(solve_class_weights(DistanceMatrix(D), partition(counts)));
      },
      py::arg("distances"), py::arg("class_counts"),
      "Exact class weights; rows of `distances` are grouped by class in `class_counts` order.");

  m.def(
      "sinkhorn_class_weights",
      [](const Matrix& D, const std::vector<std::size_t>& counts, double epsilon, std::size_t max_iters, double tol) {
        SinkhornConfig cfg;
        cfg.epsilon = epsilon;
        cfg.max_iters = max_iters;
        cfg.tol = tol;
        return solution_dict(sinkhorn_class_weights(DistanceMatrix(D), partition(counts), cfg));
      },
      py::arg("distances"), py::arg("class_counts"), py::arg("epsilon"), py::arg("max_iters") = 10000,
      py::arg("tol") = 1e-7);

  m.def(
      "brute_force_class_weights",
      [](const Matrix& D, const std::vector<std::size_t>& counts, double step) {
        BruteForceResult r = brute_force_class_weights(DistanceMatrix(D), partition(counts), step);
        return py::make_tuple(r.weights.values(), r.objective);
      },
      py::arg("distances"), py::arg("class_counts"), py::arg("grid_step"));

  m.def(
      "select_class_weights",
      [](const Matrix& source, const std::vector<ClassId>& labels, const Matrix& target, const std::string& solver) {
        SelectOptions o;
        o.solver = parse_solver_kind(solver);
        LabeledDataset src = dataset(source, labels);
        py::dict d = solution_dict(select_class_weights(src, FeatureMatrix(target), o));
        d["class_ids"] = src.class_ids();
        return d;
      },
      py::arg("source"), py::arg("labels"), py::arg("target"), py::arg("solver") = "auto",
      "Class weights for labeled source features against unlabeled target features.");

  m.def(
      "make_scenario",
      [](const std::string& kind, std::size_t k_source, std::size_t k_target, std::size_t overlap, double separation,
         std::size_t dim, std::uint64_t seed) {
        ScenarioConfig c;
        c.kind = parse_scenario_kind(kind);
        c.k_source = k_source;
        c.k_target = k_target;
        c.overlap = overlap;
        c.separation = separation;
        c.dim = dim;
        c.seed = seed;
        Scenario s = make_scenario(c);
        py::dict d;
        d["source"] = dataset_tuple(s.source);
        d["target_train"] = dataset_tuple(s.target_train);
        d["target_test"] = dataset_tuple(s.target_test);
        d["anchor"] = s.anchor;
        return d;
      },
      py::arg("kind") = "dda", py::arg("k_source") = 6, py::arg("k_target") = 3, py::arg("overlap") = 0,
      py::arg("separation") = 4.0, py::arg("dim") = 8, py::arg("seed") = 0,
      "Synthetic source / target split; datasets are (features, labels) tuples.");

  m.def(
      "run_pipeline",
      [](const py::tuple& source, const py::tuple& target_train, const py::tuple& target_test,
         const std::string& method, std::size_t encoder_dim, std::size_t epochs, std::uint64_t seed, bool bound) {
        auto unpack = [](const py::tuple& t) {
          return dataset(t[0].cast<Matrix>(), t[1].cast<std::vector<ClassId>>());
        };
        PipelineConfig cfg;
        cfg.method = parse_method(method);
        cfg.encoder_dim = encoder_dim;
        cfg.seed = seed;
        cfg.pretrain.epochs = cfg.finetune.epochs = epochs;
        cfg.pretrain.seed = cfg.finetune.seed = seed;
        const LabeledDataset test = unpack(target_test);
        PipelineResult r = run_pipeline(unpack(source), unpack(target_train), test, cfg);
        py::dict d;
        d["weights"] = r.weights.values();
        d["class_ids"] = r.source_class_ids;
        d["w1_objective"] = r.w1_objective;
        d["support_size"] = r.support_size;
        d["accuracy"] = 1.0 - r.target_eval.zero_one_error;
        d["cross_entropy"] = r.target_eval.cross_entropy;
        d["finetuned_head"] = r.finetuned.head.weights();
        d["bound"] = bound ? py::object(bound_dict(pipeline_bound_report(r, test))) : py::object(py::none());
        return d;
      },
      py::arg("source"), py::arg("target_train"), py::arg("target_test"), py::arg("method") = "wass",
      py::arg("encoder_dim") = 0, py::arg("epochs") = 200, py::arg("seed") = 0, py::arg("bound") = false);

  m.def("softmax_lipschitz_constant", &softmax_lipschitz_constant, py::arg("K"));
  m.def(
      "largest_singular_value", [](const Matrix& M) { return largest_singular_value(M).value; }, py::arg("matrix"));
  m.def(
      "induced_error", [](const Matrix& probs, const std::vector<int>& labels) { return induced_error(probs, labels); },
      py::arg("probs"), py::arg("labels"));

  m.def(
      "verify",
      [](std::uint64_t seed, std::size_t trials) {
        VerifyReport r = run_property_suites(seed, trials);
        py::list out;
        for (const auto& s : r.suites) {
          py::dict d;
          d["name"] = s.name;
          d["pass"] = s.pass();
          d["cases"] = s.cases;
          d["worst"] = s.worst;
          d["tolerance"] = s.tolerance;
          out.append(d);
        }
        return out;
      },
      py::arg("seed") = 0, py::arg("trials") = 100, "Randomized property suites.");
}
