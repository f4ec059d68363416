#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <optional>

#include "dimple/attacks.hpp"
#include "dimple/experiments.hpp"
#include "dimple/linalg.hpp"
#include "dimple/manifold.hpp"
#include "dimple/metrics.hpp"
#include "dimple/mnist.hpp"
#include "dimple/nnet.hpp"
#include "dimple/synthgen.hpp"

namespace py = pybind11;
using namespace dimple;

namespace {

AttackOutcome pgd_py(const MlpNetwork& net, const Vector& x, int true_class, AttackConfig cfg,
                     const std::optional<LocalManifold>& manifold) {
  if (manifold) cfg.manifold = &*manifold;
  return pgd(net, x, true_class, cfg);
}

SweepResult attack_sweep_py(const MlpNetwork& net, const Dataset& data, AttackConfig cfg,
                            SweepFilter filter,
                            const std::optional<std::map<int, LocalManifold>>& manifolds) {
  if (!manifolds) return attack_sweep(net, data, cfg, filter);
  const auto provider = [&manifolds](int idx) -> const LocalManifold* {
    const auto it = manifolds->find(idx);
    return it == manifolds->end() ? nullptr : &it->second;
  };
  return attack_sweep(net, data, cfg, filter, provider);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "dimplelab core: manifold-geometry experiments for adversarial examples";

  // ---- linalg ----
  py::class_<OrthonormalBasis>(m, "OrthonormalBasis")
      .def(py::init<>())
      .def_readwrite("ambient_dim", &OrthonormalBasis::ambient_dim)
      .def_readwrite("columns", &OrthonormalBasis::columns)
      .def_property_readonly("rank", &OrthonormalBasis::rank);
  m.def("orthonormalize",
        py::overload_cast<const Matrix&, double>(&orthonormalize),
        py::arg("vectors_as_columns"), py::arg("drop_tol") = 1e-8);
  m.def("project", &project, py::arg("basis"), py::arg("v"));
  m.def("min_pairwise_distance",
        py::overload_cast<const Matrix&>(&min_pairwise_distance), py::arg("points_as_rows"));

  // ---- nnet ----
  py::enum_<Activation>(m, "Activation")
      .value("ReLU", Activation::ReLU)
      .value("Sigmoid", Activation::Sigmoid)
      .value("Identity", Activation::Identity);
  py::enum_<Mode>(m, "Mode").value("Train", Mode::Train).value("Eval", Mode::Eval);

  py::class_<LayerSpec>(m, "LayerSpec")
      .def(py::init([](int in_dim, int out_dim, Activation act, double dropout_keep) {
             return LayerSpec{in_dim, out_dim, act, dropout_keep};
           }),
           py::arg("in_dim"), py::arg("out_dim"), py::arg("activation") = Activation::Identity,
           py::arg("dropout_keep") = 1.0)
      .def_readwrite("in_dim", &LayerSpec::in_dim)
      .def_readwrite("out_dim", &LayerSpec::out_dim)
      .def_readwrite("activation", &LayerSpec::activation)
      .def_readwrite("dropout_keep", &LayerSpec::dropout_keep);

  py::class_<LossKind> loss(m, "LossKind");
  loss.def_static("softmax_ce", &LossKind::softmax_ce)
      .def_static("margin", &LossKind::margin, py::arg("target") = std::nullopt)
      .def_static("mse", &LossKind::mse)
      .def_static("sigmoid_bce", &LossKind::sigmoid_bce);

  py::class_<SgdConfig>(m, "SgdConfig")
      .def(py::init([](double lr, double weight_decay) {
             return SgdConfig{lr, weight_decay};
           }),
           py::arg("lr") = 0.01, py::arg("weight_decay") = 0.0)
      .def_readwrite("lr", &SgdConfig::lr)
      .def_readwrite("weight_decay", &SgdConfig::weight_decay);
  py::class_<AdamConfig>(m, "AdamConfig")
      .def(py::init([](double lr, double weight_decay, double beta1, double beta2, double eps_hat) {
             return AdamConfig{lr, weight_decay, beta1, beta2, eps_hat};
           }),
           py::arg("lr") = 0.001, py::arg("weight_decay") = 0.0, py::arg("beta1") = 0.9,
           py::arg("beta2") = 0.999, py::arg("eps_hat") = 1e-8)
      .def_readwrite("lr", &AdamConfig::lr)
      .def_readwrite("weight_decay", &AdamConfig::weight_decay);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("optimizer", &TrainConfig::optimizer)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("loss", &TrainConfig::loss)
      .def_readwrite("rng_seed", &TrainConfig::rng_seed);

  py::class_<TrainReport>(m, "TrainReport")
      .def_readonly("epoch_loss", &TrainReport::epoch_loss)
      .def_readonly("epoch_accuracy", &TrainReport::epoch_accuracy);

  py::class_<MlpNetwork>(m, "MlpNetwork")
      .def_static("make", &MlpNetwork::make, py::arg("specs"), py::arg("seed"))
      .def_property_readonly("input_dim", &MlpNetwork::input_dim)
      .def_property_readonly("output_dim", &MlpNetwork::output_dim)
      .def("set_mode", &MlpNetwork::set_mode)
      .def("forward", py::overload_cast<const Vector&>(&MlpNetwork::forward), py::arg("x"))
      .def("forward_batch", py::overload_cast<const Matrix&>(&MlpNetwork::forward_batch),
           py::arg("rows"))
      .def("predict", &MlpNetwork::predict, py::arg("x"))
      .def("input_gradient", &MlpNetwork::input_gradient, py::arg("x"), py::arg("loss"),
           py::arg("true_class"), py::arg("target_class") = std::nullopt)
      .def("num_layers", [](const MlpNetwork& net) { return net.layers().size(); })
      .def("layer_weight",
           [](const MlpNetwork& net, int l) { return net.layers().at(l).weight; })
      .def("layer_bias", [](const MlpNetwork& net, int l) { return net.layers().at(l).bias; });

  m.def("softmax", &softmax, py::arg("logits"));
  m.def("predicted_class", &predicted_class, py::arg("logits"));
  m.def("train",
        [](MlpNetwork& net, const Dataset& data, const TrainConfig& cfg) {
          return train(net, data, cfg);
        },
        py::arg("net"), py::arg("data"), py::arg("cfg"));
  m.def("train_autoencoder", &train_autoencoder, py::arg("encoder_specs"),
        py::arg("decoder_specs"), py::arg("data"), py::arg("holdout"), py::arg("cfg"));
  m.def("accuracy", &accuracy, py::arg("net"), py::arg("data"));
  m.def("save_checkpoint", &save_checkpoint, py::arg("net"), py::arg("path"));
  m.def("load_checkpoint", &load_checkpoint, py::arg("path"));

  // ---- dataset / synthgen ----
  py::class_<Dataset>(m, "Dataset")
      .def(py::init<>())
      .def_readwrite("inputs", &Dataset::inputs)
      .def_readwrite("labels", &Dataset::labels)
      .def_readwrite("latents", &Dataset::latents)
      .def_property_readonly("size", &Dataset::size)
      .def_property_readonly("dim", &Dataset::dim);

  py::class_<SyntheticSpec>(m, "SyntheticSpec")
      .def_readonly("n", &SyntheticSpec::n)
      .def_readonly("k", &SyntheticSpec::k)
      .def_readonly("k_prime", &SyntheticSpec::k_prime)
      .def_readonly("rng_seed", &SyntheticSpec::rng_seed);
  m.def("make_trig_spec", &make_trig_spec, py::arg("n"), py::arg("k"), py::arg("k_prime"),
        py::arg("seed"), py::arg("bound_l") = 1.0, py::arg("bound_u") = 5.0);
  m.def("make_chebyshev_spec", &make_chebyshev_spec, py::arg("n"), py::arg("k"),
        py::arg("k_prime"), py::arg("seed"), py::arg("max_degree") = 20);
  m.def("make_linear_spec", &make_linear_spec, py::arg("n"), py::arg("k"), py::arg("k_prime"),
        py::arg("seed"));
  m.def("label_of", &label_of, py::arg("latent"));
  m.def("first_layer_map", &first_layer_map, py::arg("spec"), py::arg("latent"));
  m.def("second_layer_map", &second_layer_map, py::arg("spec"), py::arg("y"));
  m.def("decompress", &decompress, py::arg("spec"), py::arg("latent"));
  m.def("chebyshev_t", &chebyshev_t, py::arg("degree"), py::arg("u"));
  m.def("generate", &generate, py::arg("spec"), py::arg("m"), py::arg("first_sample_index") = 0);

  py::enum_<LowDimKind>(m, "LowDimKind")
      .value("Line1DIn2D", LowDimKind::Line1DIn2D)
      .value("Plane2DIn3D", LowDimKind::Plane2DIn3D);
  m.def("generate_lowdim", &generate_lowdim, py::arg("kind"), py::arg("clusters_per_side"),
        py::arg("points_per_cluster"), py::arg("seed"), py::arg("cluster_spread") = 0.6);
  m.def("save_dataset_csv", &save_dataset_csv, py::arg("data"), py::arg("path"));
  m.def("load_dataset_csv", &load_dataset_csv, py::arg("path"));
  m.def("save_spec", &save_spec, py::arg("spec"), py::arg("path"));
  m.def("load_spec", &load_spec, py::arg("path"));
  m.def("load_mnist", &load_mnist, py::arg("dir"), py::arg("train"));
  m.def("load_mnist_idx", &load_mnist_idx, py::arg("images_path"), py::arg("labels_path"));
  m.def("binarize_labels_mod2", &binarize_labels_mod2, py::arg("data"));

  // ---- manifold ----
  py::enum_<ManifoldSource>(m, "ManifoldSource")
      .value("Synthetic", ManifoldSource::Synthetic)
      .value("Autoencoder", ManifoldSource::Autoencoder);
  py::class_<LocalManifold>(m, "LocalManifold")
      .def(py::init<>())
      .def_readwrite("base", &LocalManifold::base)
      .def_readwrite("basis", &LocalManifold::basis)
      .def_readwrite("source", &LocalManifold::source)
      .def_readwrite("epsilon_used", &LocalManifold::epsilon_used);
  m.def("local_linearization_ae", &local_linearization_ae, py::arg("encoder"), py::arg("decoder"),
        py::arg("x"), py::arg("eps") = 0.05, py::arg("drop_tol") = 1e-8);
  m.def("local_linearization_synthetic", &local_linearization_synthetic, py::arg("spec"),
        py::arg("latent"), py::arg("eps"), py::arg("drop_tol") = 1e-8);
  m.def("save_manifold", &save_manifold, py::arg("manifold"), py::arg("path"));
  m.def("load_manifold", &load_manifold, py::arg("path"));

  // ---- attacks ----
  py::enum_<Norm>(m, "Norm").value("L2", Norm::L2).value("Linf", Norm::Linf);
  py::enum_<Constraint>(m, "Constraint")
      .value("Unconstrained", Constraint::Unconstrained)
      .value("OnManifold", Constraint::OnManifold)
      .value("OffManifold", Constraint::OffManifold);
  py::enum_<SweepFilter>(m, "SweepFilter")
      .value("CorrectlyClassifiedOnly", SweepFilter::CorrectlyClassifiedOnly)
      .value("All", SweepFilter::All);

  py::class_<AttackConfig>(m, "AttackConfig")
      .def(py::init<>())
      .def_readwrite("norm", &AttackConfig::norm)
      .def_readwrite("eps", &AttackConfig::eps)
      .def_readwrite("step_size", &AttackConfig::step_size)
      .def_readwrite("max_steps", &AttackConfig::max_steps)
      .def_readwrite("loss", &AttackConfig::loss)
      .def_readwrite("constraint", &AttackConfig::constraint)
      .def_readwrite("greedy", &AttackConfig::greedy)
      .def_readwrite("target", &AttackConfig::target)
      .def_readwrite("min_confidence", &AttackConfig::min_confidence);

  py::class_<AttackOutcome>(m, "AttackOutcome")
      .def_readonly("perturbation", &AttackOutcome::perturbation)
      .def_readonly("adversarial", &AttackOutcome::adversarial)
      .def_readonly("steps_used", &AttackOutcome::steps_used)
      .def_readonly("l2_distance", &AttackOutcome::l2_distance)
      .def_readonly("linf_distance", &AttackOutcome::linf_distance)
      .def_readonly("box_clipped", &AttackOutcome::box_clipped);

  m.def("pgd", &pgd_py, py::arg("net"), py::arg("x"), py::arg("true_class"), py::arg("cfg"),
        py::arg("manifold") = std::nullopt);
  m.def("single_step_l2_pgd", &single_step_l2_pgd, py::arg("net"), py::arg("x"),
        py::arg("true_class"), py::arg("eps"));

  py::class_<BoundaryDistance>(m, "BoundaryDistance")
      .def_readonly("found", &BoundaryDistance::found)
      .def_readonly("distance", &BoundaryDistance::distance)
      .def_readonly("steps_used", &BoundaryDistance::steps_used);
  m.def("boundary_distance", &boundary_distance, py::arg("net"), py::arg("x"),
        py::arg("probe_step"), py::arg("max_probe_steps"));

  py::class_<SweepResult>(m, "SweepResult")
      .def_readonly("sample_indices", &SweepResult::sample_indices)
      .def_readonly("outcomes", &SweepResult::outcomes);
  m.def("attack_sweep", &attack_sweep_py, py::arg("net"), py::arg("data"), py::arg("cfg"),
        py::arg("filter"), py::arg("manifolds") = std::nullopt);

  // ---- metrics ----
  py::class_<MetricsReport>(m, "MetricsReport")
      .def_readonly("dataset_name", &MetricsReport::dataset_name)
      .def_readonly("ambient_dim", &MetricsReport::ambient_dim)
      .def_readonly("manifold_dim", &MetricsReport::manifold_dim)
      .def_readonly("expected_ratio_bar", &MetricsReport::expected_ratio_bar)
      .def_readonly("mean_ratio", &MetricsReport::mean_ratio)
      .def_readonly("mean_on_manifold_effect", &MetricsReport::mean_on_manifold_effect)
      .def_readonly("mean_distance", &MetricsReport::mean_distance)
      .def_readonly("sample_count", &MetricsReport::sample_count)
      .def_readonly("infinite_ratio_count", &MetricsReport::infinite_ratio_count);

  m.def("norm_ratio", &norm_ratio, py::arg("d"), py::arg("manifold"));
  m.def("expected_ratio", &expected_ratio, py::arg("n"), py::arg("k"));
  py::class_<MonteCarloRatio>(m, "MonteCarloRatio")
      .def_readonly("mean_sq_ratio", &MonteCarloRatio::mean_sq_ratio)
      .def_readonly("mean_ratio", &MonteCarloRatio::mean_ratio);
  m.def("random_ratio_monte_carlo", &random_ratio_monte_carlo, py::arg("n"), py::arg("k"),
        py::arg("trials"), py::arg("seed"));
  m.def("adversarial_effect", &adversarial_effect, py::arg("net"), py::arg("x_prime"),
        py::arg("d"), py::arg("class_i"), py::arg("class_t"));
  m.def("relative_on_manifold_effect", &relative_on_manifold_effect, py::arg("net"),
        py::arg("x_prime"), py::arg("d"), py::arg("manifold"), py::arg("class_i"),
        py::arg("class_t"));

  // ---- experiments ----
  m.def(
      "run_experiment",
      [](const std::string& name, const std::string& config_path,
         std::optional<std::uint64_t> seed, std::optional<std::string> out_dir, bool check) {
        const auto cfg = ExperimentConfig::load(name, config_path, seed, out_dir);
        return run_experiment(cfg, check);
      },
      py::arg("name"), py::arg("config_path") = "", py::arg("seed") = std::nullopt,
      py::arg("out_dir") = std::nullopt, py::arg("check") = false,
      "runs a named pipeline; returns the list of failed checks (empty = ok)");
}
