#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tedia/btd.hpp"
#include "tedia/io.hpp"
#include "tedia/perturbation.hpp"
#include "tedia/scaling.hpp"
#include "tedia/synth.hpp"
#include "tedia/tucker.hpp"

namespace py = pybind11;
using namespace tedia;

namespace {

// Tensor3 storage is C-contiguous (i,j,k) with k fastest, so conversion to
// and from numpy is a straight copy.
template <class T>
Tensor3<T> tensor_from_array(const py::array_t<T, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 3) throw std::invalid_argument("expected a 3-d array");
  Tensor3<T> t(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)),
               static_cast<int>(a.shape(2)));
  std::copy(a.data(), a.data() + t.size(), t.data());
  return t;
}

template <class T>
py::array_t<T> array_from_tensor(const Tensor3<T>& t) {
  py::array_t<T> a({t.n1(), t.n2(), t.n3()});
  std::copy(t.data(), t.data() + t.size(), a.mutable_data());
  return a;
}

template <class T>
py::dict transforms_to_dict(const TransformSet<T>& tr) {
  py::dict d;
  d["A"] = tr.A;
  d["B"] = tr.B;
  d["C"] = tr.C;
  d["A_tilde"] = tr.A_tilde;
  d["B_tilde"] = tr.B_tilde;
  d["C_tilde"] = tr.C_tilde;
  return d;
}

template <class T>
TransformSet<T> transforms_from_dict(const py::dict& d) {
  TransformSet<T> tr;
  tr.A = d["A"].cast<Mat<T>>();
  tr.B = d["B"].cast<Mat<T>>();
  tr.C = d["C"].cast<Mat<T>>();
  tr.A_tilde = d["A_tilde"].cast<Mat<T>>();
  tr.B_tilde = d["B_tilde"].cast<Mat<T>>();
  tr.C_tilde = d["C_tilde"].cast<Mat<T>>();
  return tr;
}

template <class T>
py::dict result_to_dict(const DiagonalizationResult<T>& r) {
  py::dict d;
  d["core"] = array_from_tensor(r.core);
  d["transforms"] = transforms_to_dict(r.transforms);
  d["sweeps"] = r.sweeps_run;
  d["converged"] = r.converged;
  d["theta_max_history"] = r.theta_max_history;
  d["off_norm_history"] = r.off_norm_history;
  return d;
}

template <class T>
py::dict run_tedia(const py::array_t<T, py::array::c_style | py::array::forcecast>& a,
                   double epsilon, int max_sweeps) {
  TediaConfig cfg;
  cfg.epsilon = epsilon;
  cfg.max_sweeps = max_sweeps;
  return result_to_dict(tedia::tedia(tensor_from_array<T>(a), cfg));
}

template <class T>
py::dict run_hooi(const py::array_t<T, py::array::c_style | py::array::forcecast>& a, int n,
                  int max_iter, double tol) {
  const TuckerResult<T> r = hooi_compress(tensor_from_array<T>(a), n, max_iter, tol);
  py::dict d;
  d["core"] = array_from_tensor(r.core);
  d["factors"] = py::make_tuple(r.factors[0], r.factors[1], r.factors[2]);
  d["fit"] = r.fit;
  d["fit_history"] = r.fit_history;
  return d;
}

}  // namespace

PYBIND11_MODULE(_tedia, m) {
  m.doc() = "Non-orthogonal three-sided tensor diagonalization";

  py::register_exception<RegularityError>(m, "RegularityError");
  py::register_exception<SingularSystemError>(m, "SingularSystemError");
  py::register_exception<FormatError>(m, "FormatError");

  m.def("mode_product",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
           const MatD& mat, int mode) {
          return array_from_tensor(mode_product(tensor_from_array<double>(a), mat, mode));
        },
        py::arg("t"), py::arg("m"), py::arg("mode"));
  m.def("off",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
          return array_from_tensor(off(tensor_from_array<double>(a)));
        });
  m.def("frobenius_norm",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
          return frobenius_norm(tensor_from_array<double>(a));
        });

  m.def("tedia", &run_tedia<double>, py::arg("t"), py::arg("epsilon") = 1e-6,
        py::arg("max_sweeps") = 1000, "Diagonalize a real cubic tensor");
  m.def("tedia_complex", &run_tedia<cplx>, py::arg("t"), py::arg("epsilon") = 1e-6,
        py::arg("max_sweeps") = 1000, "Diagonalize a complex cubic tensor");

  m.def("hooi", &run_hooi<double>, py::arg("t"), py::arg("n"), py::arg("max_iter") = 50,
        py::arg("tol") = 1e-12, "Orthogonal Tucker compression to n x n x n");

  m.def("check_brc",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a, double tol) {
          const BrcResult r = check_brc(tensor_from_array<double>(a), tol);
          return py::make_tuple(r.satisfied, r.worst_residual);
        },
        py::arg("e"), py::arg("tol") = 1e-8);

  m.def("similarity",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
          const SimilarityMatrices f = similarity(tensor_from_array<double>(a));
          py::dict d;
          d["F1"] = f.F1;
          d["F2"] = f.F2;
          d["F3"] = f.F3;
          d["F"] = f.F;
          return d;
        });

  m.def("cluster_blocks",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
           double stop_ratio) {
          const BlockStructure b =
              cluster_blocks(similarity(tensor_from_array<double>(a)), stop_ratio);
          return py::make_tuple(b.perm, b.block_sizes);
        },
        py::arg("core"), py::arg("stop_ratio") = 0.1,
        "Average-link clustering of a core tensor; returns (perm, sizes)");

  m.def("rcm_blocks",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
           double zero_tol) {
          const BlockStructure b = rcm_blocks(similarity(tensor_from_array<double>(a)), zero_tol);
          return py::make_tuple(b.perm, b.block_sizes);
        },
        py::arg("core"), py::arg("zero_tol") = 1e-8);

  m.def("permute_solution",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& core,
           const py::dict& transforms, const std::vector<int>& perm,
           const std::vector<int>& sizes) {
          Tensor3D e = tensor_from_array<double>(core);
          TransformSet<double> tr = transforms_from_dict<double>(transforms);
          BlockStructure b;
          b.perm = perm;
          b.block_sizes = sizes;
          apply_block_permutation(e, tr, b);
          return py::make_tuple(array_from_tensor(e), transforms_to_dict(tr));
        },
        py::arg("core"), py::arg("transforms"), py::arg("perm"), py::arg("sizes"));

  m.def("btd_refine",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& t,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& core,
           const py::dict& transforms, const std::vector<int>& perm,
           const std::vector<int>& sizes, int max_iter, double tol) {
          DiagonalizationResult<double> r;
          r.core = tensor_from_array<double>(core);
          r.transforms = transforms_from_dict<double>(transforms);
          BlockStructure b;
          b.perm = perm;
          b.block_sizes = sizes;
          const BtdModel init = from_tedia(r, b);
          const AlsResult als = als_refine(tensor_from_array<double>(t), init, max_iter, tol);
          py::dict d;
          py::list cores, fa, fb, fc;
          for (const auto& c : als.model.cores) cores.append(array_from_tensor(c));
          for (const auto& f : als.model.factors[0]) fa.append(f);
          for (const auto& f : als.model.factors[1]) fb.append(f);
          for (const auto& f : als.model.factors[2]) fc.append(f);
          d["cores"] = cores;
          d["factors_A"] = fa;
          d["factors_B"] = fb;
          d["factors_C"] = fc;
          d["fit_history"] = als.fit_history;
          d["iterations"] = als.iterations;
          return d;
        },
        py::arg("t"), py::arg("core"), py::arg("transforms"), py::arg("perm"),
        py::arg("sizes"), py::arg("max_iter") = 100, py::arg("tol") = 1e-10);

  m.def("perturbation_report",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& t,
           const py::dict& transforms, double sigma2, bool with_matrices) {
          const PerturbationReport rep = analyze_perturbation(
              tensor_from_array<double>(t), transforms_from_dict<double>(transforms), sigma2);
          py::dict d;
          d["stable"] = rep.stable;
          d["h1_min_singular_ratio"] = rep.h1_min_singular_ratio;
          d["stationary"] = rep.stationary;
          d["sigma2"] = rep.sigma2;
          if (rep.stable) d["msae"] = rep.msae;
          if (with_matrices) {
            d["H1"] = rep.H1;
            d["H2"] = rep.H2;
            if (rep.stable) d["cov"] = rep.cov;
          }
          return d;
        },
        py::arg("t"), py::arg("transforms"), py::arg("sigma2"),
        py::arg("with_matrices") = false);

  m.def("colinear_matrix", &colinear_matrix, py::arg("n"), py::arg("c"));
  m.def("subspace_angle", &subspace_angle, py::arg("s1"), py::arg("s2"));
  m.def("random_orthogonal", &random_orthogonal, py::arg("n"), py::arg("seed"));

  m.def("make_scenario",
        [](const std::string& kind, int n, const std::vector<int>& sizes, double c,
           std::uint64_t seed) {
          ScenarioConfig cfg;
          cfg.kind = kind == "block" ? ScenarioKind::BlockDiagonal : ScenarioKind::CpDiagonal;
          cfg.n = n;
          cfg.block_sizes = sizes;
          cfg.c = c;
          cfg.seed = seed;
          const Scenario sc = make_scenario(cfg, seed);
          py::dict d;
          d["t"] = array_from_tensor(sc.t);
          d["core"] = array_from_tensor(sc.core);
          d["transforms"] = transforms_to_dict(sc.transforms);
          d["block_sizes"] = sc.block_sizes;
          return d;
        },
        py::arg("kind"), py::arg("n"), py::arg("sizes") = std::vector<int>{},
        py::arg("c") = 0.0, py::arg("seed") = 0);

  m.def("add_noise",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& t,
           double snr_db, std::uint64_t seed) {
          const NoisyTensor r = add_noise(tensor_from_array<double>(t), snr_db, seed);
          return py::make_tuple(array_from_tensor(r.t), r.sigma2);
        },
        py::arg("t"), py::arg("snr_db"), py::arg("seed") = 0);

  m.def("read_tensor", [](const std::string& path) -> py::object {
    AnyTensor any = read_tensor_file(path);
    if (auto* d = std::get_if<Tensor3<double>>(&any)) return array_from_tensor(*d);
    return array_from_tensor(std::get<Tensor3<cplx>>(any));
  });
  m.def("write_tensor", [](const std::string& path, const py::array& a) {
    if (py::isinstance<py::array_t<cplx>>(a))
      write_tensor_file(path, tensor_from_array<cplx>(a.cast<py::array_t<cplx>>()));
    else
      write_tensor_file(path,
                        tensor_from_array<double>(a.cast<py::array_t<double>>()));
  });

  m.def("residual_fit",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& t,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& core,
           const py::dict& transforms) {
          DiagonalizationResult<double> r;
          r.core = tensor_from_array<double>(core);
          r.transforms = transforms_from_dict<double>(transforms);
          return residual_fit(tensor_from_array<double>(t), r);
        },
        py::arg("t"), py::arg("core"), py::arg("transforms"));
}
