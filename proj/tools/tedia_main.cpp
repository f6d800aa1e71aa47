// Command line front end: decompose a tensor file, detect blocks, refine a
// block-term model, run the perturbation analysis, generate synthetic
// scenarios, and run benchmark campaigns.
//
// Exit codes: 0 ok, 2 input/format problem, 3 non-convergence, 4 internal.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "tedia/btd.hpp"
#include "tedia/io.hpp"
#include "tedia/perturbation.hpp"
#include "tedia/scaling.hpp"
#include "tedia/synth.hpp"
#include "tedia/tucker.hpp"

namespace fs = std::filesystem;
using namespace tedia;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNoConvergence = 3;
constexpr int kExitInternal = 4;

struct CliError : std::runtime_error {
  int code;
  CliError(int code_, const std::string& msg) : std::runtime_error(msg), code(code_) {}
};

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw CliError(kExitInput, "cannot create output directory '" + dir + "'");
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw CliError(kExitInternal, "cannot write '" + path + "'");
  os << text;
}

std::string read_text(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw CliError(kExitInput, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

template <class T>
void write_transforms(const std::string& dir, const TransformSet<T>& tr) {
  write_matrix_file(dir + "/A.mat", tr.A);
  write_matrix_file(dir + "/B.mat", tr.B);
  write_matrix_file(dir + "/C.mat", tr.C);
  write_matrix_file(dir + "/A_tilde.mat", tr.A_tilde);
  write_matrix_file(dir + "/B_tilde.mat", tr.B_tilde);
  write_matrix_file(dir + "/C_tilde.mat", tr.C_tilde);
}

template <class T>
TransformSet<T> read_transforms(const std::string& dir) {
  TransformSet<T> tr;
  tr.A = expect_matrix<T>(read_matrix_file(dir + "/A.mat"), "A");
  tr.B = expect_matrix<T>(read_matrix_file(dir + "/B.mat"), "B");
  tr.C = expect_matrix<T>(read_matrix_file(dir + "/C.mat"), "C");
  tr.A_tilde = expect_matrix<T>(read_matrix_file(dir + "/A_tilde.mat"), "A_tilde");
  tr.B_tilde = expect_matrix<T>(read_matrix_file(dir + "/B_tilde.mat"), "B_tilde");
  tr.C_tilde = expect_matrix<T>(read_matrix_file(dir + "/C_tilde.mat"), "C_tilde");
  return tr;
}

template <class T>
int run_decompose_typed(Tensor3<T> t, const std::string& out, double epsilon,
                        int max_sweeps, std::optional<int> tucker_n) {
  ensure_dir(out);
  if (tucker_n || !t.is_cubic()) {
    const int n = tucker_n ? *tucker_n : std::min({t.n1(), t.n2(), t.n3()});
    const TuckerResult<T> tk = hooi_compress(t, n);
    write_matrix_file(out + "/q1.mat", tk.factors[0]);
    write_matrix_file(out + "/q2.mat", tk.factors[1]);
    write_matrix_file(out + "/q3.mat", tk.factors[2]);
    write_text(out + "/tucker_fit.txt", format_value(tk.fit) + "\n");
    t = tk.core;
  }
  write_tensor_file(out + "/input.tensor", t);

  TediaConfig cfg;
  cfg.epsilon = epsilon;
  cfg.max_sweeps = max_sweeps;
  const DiagonalizationResult<T> r = tedia::tedia(t, cfg);

  write_tensor_file(out + "/core.tensor", r.core);
  write_transforms(out, r.transforms);

  std::ostringstream log;
  log << "sweeps: " << r.sweeps_run << '\n';
  log << "converged: " << (r.converged ? "yes" : "no") << '\n';
  const BrcResult brc = check_brc(r.core, 1e-8);
  log << "brc_residual: " << format_value(brc.worst_residual) << '\n';
  log << "residual_fit: " << format_value(residual_fit(t, r)) << '\n';
  log << "sweep theta_max off_norm\n";
  for (std::size_t s = 0; s < r.theta_max_history.size(); ++s)
    log << s + 1 << ' ' << format_value(r.theta_max_history[s]) << ' '
        << format_value(r.off_norm_history[s + 1]) << '\n';
  write_text(out + "/run.log", log.str());

  if (!r.converged) {
    std::cerr << "tedia: did not converge within " << max_sweeps << " sweeps\n";
    return kExitNoConvergence;
  }
  return kExitOk;
}

int run_decompose(const std::string& input, const std::string& out, double epsilon,
                  int max_sweeps, std::optional<int> tucker_n) {
  AnyTensor any = read_tensor_file(input);
  return std::visit(
      [&](auto t) { return run_decompose_typed(std::move(t), out, epsilon, max_sweeps, tucker_n); },
      std::move(any));
}

template <class T>
int run_blocks_typed(const std::string& in, const std::string& out,
                     const std::string& method, double stop_ratio, double zero_tol) {
  Tensor3<T> core = expect_tensor<T>(read_tensor_file(in + "/core.tensor"), "core");
  TransformSet<T> tr = read_transforms<T>(in);
  const SimilarityMatrices f = similarity(core);
  const BlockStructure b =
      method == "rcm" ? rcm_blocks(f, zero_tol) : cluster_blocks(f, stop_ratio);

  Tensor3<T> permuted = core;
  TransformSet<T> ptr = tr;
  apply_block_permutation(permuted, ptr, b);

  ensure_dir(out);
  write_text(out + "/structure.txt", block_structure_to_text(b));
  write_tensor_file(out + "/core.tensor", permuted);
  write_transforms(out, ptr);
  write_matrix_file(out + "/similarity.mat", f.F);
  if (fs::exists(in + "/input.tensor"))
    fs::copy_file(in + "/input.tensor", out + "/input.tensor",
                  fs::copy_options::overwrite_existing);
  std::cout << "blocks:";
  for (int s : b.block_sizes) std::cout << ' ' << s;
  std::cout << '\n';
  return kExitOk;
}

int run_blocks(const std::string& in, const std::string& out, const std::string& method,
               double stop_ratio, double zero_tol) {
  AnyTensor any = read_tensor_file(in + "/core.tensor");
  if (std::holds_alternative<Tensor3<double>>(any))
    return run_blocks_typed<double>(in, out, method, stop_ratio, zero_tol);
  return run_blocks_typed<cplx>(in, out, method, stop_ratio, zero_tol);
}

int run_refine(const std::string& in, const std::string& out, int max_iter, double tol) {
  const Tensor3D t = expect_tensor<double>(read_tensor_file(in + "/input.tensor"),
                                           "input (refine is real-domain only)");
  const Tensor3D core = expect_tensor<double>(read_tensor_file(in + "/core.tensor"), "core");
  const BlockStructure b = block_structure_from_text(read_text(in + "/structure.txt"));

  DiagonalizationResult<double> r;
  r.core = core;
  r.transforms = read_transforms<double>(in);
  // blocks output is already permuted; partition contiguously
  BlockStructure contiguous;
  contiguous.perm.resize(b.perm.size());
  for (std::size_t s = 0; s < b.perm.size(); ++s) contiguous.perm[s] = static_cast<int>(s);
  contiguous.block_sizes = b.block_sizes;

  const BtdModel init = from_tedia(r, contiguous);
  const AlsResult als = als_refine(t, init, max_iter, tol);

  ensure_dir(out);
  std::ostringstream manifest;
  manifest << "blocks:";
  for (int s : als.model.block_sizes()) manifest << ' ' << s;
  manifest << '\n';
  write_text(out + "/manifest.txt", manifest.str());
  for (std::size_t blk = 0; blk < als.model.cores.size(); ++blk) {
    const std::string tag = std::to_string(blk);
    write_tensor_file(out + "/core_" + tag + ".tensor", als.model.cores[blk]);
    write_matrix_file(out + "/factor_A_" + tag + ".mat", als.model.factors[0][blk]);
    write_matrix_file(out + "/factor_B_" + tag + ".mat", als.model.factors[1][blk]);
    write_matrix_file(out + "/factor_C_" + tag + ".mat", als.model.factors[2][blk]);
  }
  std::ostringstream hist;
  for (double fit : als.fit_history) hist << format_value(fit) << '\n';
  write_text(out + "/fit_history.txt", hist.str());
  std::cout << "refine: fit " << als.fit_history.front() << " -> "
            << als.fit_history.back() << " in " << als.iterations << " iterations\n";
  return kExitOk;
}

int run_perturb(const std::string& in, const std::string& out, double sigma2,
                std::optional<double> snr_db, bool dump) {
  const Tensor3D t = expect_tensor<double>(read_tensor_file(in + "/input.tensor"),
                                           "input (perturbation analysis is real-domain only)");
  const TransformSet<double> tr = read_transforms<double>(in);
  if (snr_db) {
    const double n3 = static_cast<double>(t.n1()) * t.n2() * t.n3();
    sigma2 = frobenius_norm_sq(t) * std::pow(10.0, -*snr_db / 10.0) / n3;
  }
  const PerturbationReport rep = analyze_perturbation(t, tr, sigma2);
  ensure_dir(out);
  write_text(out + "/report.txt", perturbation_summary(rep));
  if (dump) {
    write_matrix_file(out + "/h1.mat", rep.H1);
    write_matrix_file(out + "/h2.mat", rep.H2);
    if (rep.stable) write_matrix_file(out + "/cov.mat", rep.cov);
  }
  std::cout << perturbation_summary(rep);
  return kExitOk;
}

int run_synth(const std::string& kind, int n, const std::vector<int>& sizes, double c,
              std::optional<double> snr_db, std::uint64_t seed, const std::string& out) {
  ScenarioConfig cfg;
  cfg.kind = kind == "block" ? ScenarioKind::BlockDiagonal : ScenarioKind::CpDiagonal;
  cfg.n = n;
  cfg.block_sizes = sizes;
  cfg.c = c;
  cfg.snr_db = snr_db;
  cfg.seed = seed;
  cfg.validate();

  const Scenario sc = make_scenario(cfg, split_seed(seed, 0));
  const NoisyTensor noisy = add_noise(sc.t, snr_db, split_seed(seed, 1));

  ensure_dir(out);
  write_tensor_file(out + "/t.tensor", noisy.t);
  write_tensor_file(out + "/core_true.tensor", sc.core);
  write_matrix_file(out + "/mix_A.mat", sc.transforms.A_tilde);
  write_matrix_file(out + "/mix_B.mat", sc.transforms.B_tilde);
  write_matrix_file(out + "/mix_C.mat", sc.transforms.C_tilde);
  std::ostringstream meta;
  meta << "kind: " << kind << "\nn: " << n << "\nc: " << format_value(c) << '\n';
  meta << "sizes:";
  for (int s : sc.block_sizes) meta << ' ' << s;
  meta << "\nseed: " << seed << '\n';
  meta << "sigma2: " << format_value(noisy.sigma2) << '\n';
  if (snr_db) meta << "snr_db: " << format_value(*snr_db) << '\n';
  write_text(out + "/meta.txt", meta.str());
  return kExitOk;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

int run_bench(const std::string& config_path, const std::string& out) {
  // key=value config mirroring ScenarioConfig; c and snr_db accept comma lists
  ScenarioConfig base;
  std::vector<double> c_values{0.0};
  std::vector<std::optional<double>> snr_values{std::nullopt};

  std::istringstream is(read_text(config_path));
  std::string line;
  while (std::getline(is, line)) {
    const auto pos = line.find('=');
    if (pos == std::string::npos || line.empty() || line[0] == '#') continue;
    const std::string key = line.substr(0, pos);
    const std::string val = line.substr(pos + 1);
    try {
      if (key == "kind")
        base.kind = val == "block" ? ScenarioKind::BlockDiagonal : ScenarioKind::CpDiagonal;
      else if (key == "n")
        base.n = std::stoi(val);
      else if (key == "sizes") {
        base.block_sizes.clear();
        for (double v : parse_double_list(val)) base.block_sizes.push_back(static_cast<int>(v));
      } else if (key == "c")
        c_values = parse_double_list(val);
      else if (key == "snr_db") {
        snr_values.clear();
        if (val == "noiseless")
          snr_values.push_back(std::nullopt);
        else
          for (double v : parse_double_list(val)) snr_values.push_back(v);
      } else if (key == "trials")
        base.trials = std::stoi(val);
      else if (key == "seed")
        base.seed = std::stoull(val);
      else if (key == "refine")
        base.refine = std::stoi(val) != 0;
      else if (key == "epsilon")
        base.tedia.epsilon = std::stod(val);
      else if (key == "max_sweeps")
        base.tedia.max_sweeps = std::stoi(val);
      else if (key == "stop_ratio")
        base.cluster_stop_ratio = std::stod(val);
      else
        throw CliError(kExitInput, "unknown bench config key '" + key + "'");
    } catch (const CliError&) {
      throw;
    } catch (const std::exception&) {
      throw CliError(kExitInput, "bad value for bench config key '" + key + "'");
    }
  }

  ensure_dir(out);
  std::ofstream trials_csv(out + "/trials.csv");
  std::ofstream summary_csv(out + "/summary.csv");
  if (!trials_csv || !summary_csv) throw CliError(kExitInternal, "cannot write CSV output");
  trials_csv << "trial,mode,block,sq_angle_rad2,off_norm,sweeps,wall_ms\n";
  summary_csv << "kind,n,c,snr_db,refine,trials,failures,mean_sq_angle,median_sq_angle,"
                 "mean_sq_angle_db,median_sq_angle_db,mean_wall_ms\n";

  for (double c : c_values) {
    for (const auto& snr : snr_values) {
      ScenarioConfig cfg = base;
      cfg.c = c;
      cfg.snr_db = snr;
      cfg.validate();
      const CampaignResult res = run_campaign(cfg);
      for (const auto& tm : res.trials) {
        if (tm.failed) continue;
        for (std::size_t mode = 0; mode < tm.sq_angles.size(); ++mode)
          for (std::size_t blk = 0; blk < tm.sq_angles[mode].size(); ++blk)
            trials_csv << tm.trial << ',' << mode + 1 << ',' << blk + 1 << ','
                       << format_value(tm.sq_angles[mode][blk]) << ','
                       << format_value(tm.off_norm) << ',' << tm.sweeps << ','
                       << format_value(tm.wall_ms) << '\n';
      }
      summary_csv << (base.kind == ScenarioKind::BlockDiagonal ? "block" : "cp") << ','
                  << cfg.n << ',' << c << ','
                  << (snr ? std::to_string(*snr) : std::string("noiseless")) << ','
                  << (cfg.refine ? 1 : 0) << ',' << cfg.trials << ',' << res.failures << ','
                  << format_value(res.mean_sq_angle) << ','
                  << format_value(res.median_sq_angle) << ','
                  << format_value(res.mean_sq_angle_db) << ','
                  << format_value(res.median_sq_angle_db) << ','
                  << format_value(res.mean_wall_ms) << '\n';
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Non-orthogonal three-sided tensor diagonalization toolkit"};
  app.require_subcommand(1);

  // decompose
  auto* dec = app.add_subcommand("decompose", "Diagonalize a tensor file");
  std::string dec_input, dec_out;
  double dec_epsilon = 1e-6;
  int dec_sweeps = 1000;
  int dec_tucker = -1;
  dec->add_option("--input", dec_input, "TEDIA-TENSOR input file")->required();
  dec->add_option("--out", dec_out, "output directory")->required();
  dec->add_option("--epsilon", dec_epsilon, "stopping threshold on theta");
  dec->add_option("--max-sweeps", dec_sweeps, "sweep limit");
  dec->add_option("--tucker", dec_tucker, "compress to n x n x n first");

  // blocks
  auto* blk = app.add_subcommand("blocks", "Recover block structure of a decomposition");
  std::string blk_in, blk_out, blk_method = "cluster";
  double blk_stop = 0.1, blk_zero = 1e-8;
  blk->add_option("--in", blk_in, "decompose output directory")->required();
  blk->add_option("--out", blk_out, "output directory")->required();
  blk->add_option("--method", blk_method, "cluster (default) or rcm")
      ->check(CLI::IsMember({"cluster", "rcm"}));
  blk->add_option("--stop-ratio", blk_stop, "clustering stop ratio");
  blk->add_option("--zero-tol", blk_zero, "RCM threshold");

  // refine
  auto* ref = app.add_subcommand("refine", "ALS refinement of a block decomposition");
  std::string ref_in, ref_out;
  int ref_iter = 200;
  double ref_tol = 1e-12;
  ref->add_option("--in", ref_in, "blocks output directory")->required();
  ref->add_option("--out", ref_out, "output directory")->required();
  ref->add_option("--max-iter", ref_iter, "ALS iteration limit");
  ref->add_option("--tol", ref_tol, "fit improvement tolerance");

  // perturb
  auto* per = app.add_subcommand("perturb", "First-order perturbation analysis");
  std::string per_in, per_out;
  double per_sigma2 = 0.0;
  double per_snr = std::numeric_limits<double>::quiet_NaN();
  bool per_dump = false;
  per->add_option("--in", per_in, "decompose output directory")->required();
  per->add_option("--out", per_out, "output directory")->required();
  per->add_option("--sigma2", per_sigma2, "noise variance");
  per->add_option("--snr-db", per_snr, "derive sigma2 from an SNR in dB");
  per->add_flag("--dump", per_dump, "also write H1/H2/cov matrices");

  // synth
  auto* syn = app.add_subcommand("synth", "Generate a synthetic scenario");
  std::string syn_kind = "cp", syn_out, syn_sizes;
  int syn_n = 5;
  double syn_c = 0.0;
  double syn_snr = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t syn_seed = 0;
  syn->add_option("--kind", syn_kind, "cp or block")->check(CLI::IsMember({"cp", "block"}));
  syn->add_option("--n", syn_n, "tensor dimension");
  syn->add_option("--sizes", syn_sizes, "comma-separated block sizes");
  syn->add_option("--c", syn_c, "column colinearity in [0,1)");
  syn->add_option("--snr-db", syn_snr, "noise level (omit for noiseless)");
  syn->add_option("--seed", syn_seed, "random seed");
  syn->add_option("--out", syn_out, "output directory")->required();

  // bench
  auto* ben = app.add_subcommand("bench", "Run a Monte Carlo campaign");
  std::string ben_config, ben_out;
  ben->add_option("--config", ben_config, "key=value campaign config file")->required();
  ben->add_option("--out", ben_out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*dec)
      return run_decompose(dec_input, dec_out, dec_epsilon, dec_sweeps,
                           dec_tucker > 0 ? std::optional<int>(dec_tucker) : std::nullopt);
    if (*blk) return run_blocks(blk_in, blk_out, blk_method, blk_stop, blk_zero);
    if (*ref) return run_refine(ref_in, ref_out, ref_iter, ref_tol);
    if (*per)
      return run_perturb(per_in, per_out, per_sigma2,
                         std::isnan(per_snr) ? std::nullopt : std::optional<double>(per_snr),
                         per_dump);
    if (*syn) {
      std::vector<int> sizes;
      for (double v : parse_double_list(syn_sizes)) sizes.push_back(static_cast<int>(v));
      return run_synth(syn_kind, syn_n, sizes, syn_c,
                       std::isnan(syn_snr) ? std::nullopt : std::optional<double>(syn_snr),
                       syn_seed, syn_out);
    }
    if (*ben) return run_bench(ben_config, ben_out);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code;
  } catch (const FormatError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}
