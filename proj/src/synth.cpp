#include "tedia/synth.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <random>
#include <thread>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "tedia/btd.hpp"

namespace tedia {

void ScenarioConfig::validate() const {
  if (n < 1) throw std::invalid_argument("ScenarioConfig: n must be positive");
  if (!(c >= 0.0 && c < 1.0)) throw std::invalid_argument("ScenarioConfig: c must be in [0,1)");
  if (trials < 1) throw std::invalid_argument("ScenarioConfig: trials must be >= 1");
  if (kind == ScenarioKind::BlockDiagonal) {
    if (block_sizes.empty())
      throw std::invalid_argument("ScenarioConfig: block scenario needs block sizes");
    int total = 0;
    for (int s : block_sizes) {
      if (s < 1) throw std::invalid_argument("ScenarioConfig: block sizes must be positive");
      total += s;
    }
    if (total != n) throw std::invalid_argument("ScenarioConfig: block sizes must sum to n");
  }
  tedia.validate();
}

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97f4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

MatD colinear_matrix(int n, double c) {
  if (n < 1) throw std::invalid_argument("colinear_matrix: n must be positive");
  if (!(c >= 0.0 && c < 1.0))
    throw std::invalid_argument("colinear_matrix: c must be in [0,1)");
  const double eps = (std::sqrt(1.0 - c + n * c) - std::sqrt(1.0 - c)) / n;
  const double gamma = std::sqrt(1.0 - (n - 1) * eps * eps) - eps;
  MatD a = MatD::Constant(n, n, eps);
  a.diagonal().array() += gamma;
  return a;
}

MatD random_orthogonal(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  MatD g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = gauss(rng);
  Eigen::HouseholderQR<MatD> qr(g);
  MatD q = qr.householderQ() * MatD::Identity(n, n);
  const MatD r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < n; ++i)
    if (r(i, i) < 0.0) q.col(i) = -q.col(i);
  return q;
}

Scenario make_cp_scenario(const ScenarioConfig& cfg) {
  if (cfg.kind != ScenarioKind::CpDiagonal)
    throw std::invalid_argument("make_cp_scenario: kind must be cp-diagonal");
  cfg.validate();
  const int n = cfg.n;

  Scenario sc;
  std::vector<double> diag(n);
  for (int i = 0; i < n; ++i) diag[i] = i + 1.0;
  sc.core = diagonal_tensor(diag);

  TransformSet<double>& tr = sc.transforms;
  tr.A = colinear_matrix(n, cfg.c);
  tr.B = MatD::Identity(n, n);
  tr.C = MatD::Identity(n, n);
  tr.A_tilde = tr.A.partialPivLu().inverse();
  tr.B_tilde = MatD::Identity(n, n);
  tr.C_tilde = MatD::Identity(n, n);

  sc.t = mode_product(sc.core, tr.A_tilde, 1);
  sc.block_sizes.assign(n, 1);
  return sc;
}

Scenario make_block_scenario(const ScenarioConfig& cfg, std::uint64_t seed) {
  if (cfg.kind != ScenarioKind::BlockDiagonal)
    throw std::invalid_argument("make_block_scenario: kind must be block-diagonal");
  cfg.validate();
  const int n = cfg.n;

  Scenario sc;
  sc.block_sizes = cfg.block_sizes;
  sc.core = Tensor3D(n, n, n);
  int off = 0;
  std::uint64_t stream = 0;
  for (int s : cfg.block_sizes) {
    // block = (I_s + ones) rotated by fresh orthogonal factors: rank s+1
    Tensor3D blk(s, s, s);
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < s; ++j)
        for (int k = 0; k < s; ++k) blk(i, j, k) = 1.0 + (i == j && j == k ? 1.0 : 0.0);
    for (int mode = 1; mode <= 3; ++mode)
      blk = mode_product(blk, random_orthogonal(s, split_seed(seed, stream++)), mode);
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < s; ++j)
        for (int k = 0; k < s; ++k) sc.core(off + i, off + j, off + k) = blk(i, j, k);
    off += s;
  }

  const MatD ac = colinear_matrix(n, cfg.c);
  TransformSet<double>& tr = sc.transforms;
  tr.A_tilde = random_orthogonal(n, split_seed(seed, stream++)) * ac;
  tr.B_tilde = random_orthogonal(n, split_seed(seed, stream++)) * ac;
  tr.C_tilde = random_orthogonal(n, split_seed(seed, stream++)) * ac;
  tr.A = tr.A_tilde.partialPivLu().inverse();
  tr.B = tr.B_tilde.partialPivLu().inverse();
  tr.C = tr.C_tilde.partialPivLu().inverse();

  sc.t = mode_product(sc.core, tr.A_tilde, 1);
  sc.t = mode_product(sc.t, tr.B_tilde, 2);
  sc.t = mode_product(sc.t, tr.C_tilde, 3);
  return sc;
}

Scenario make_scenario(const ScenarioConfig& cfg, std::uint64_t seed) {
  return cfg.kind == ScenarioKind::CpDiagonal ? make_cp_scenario(cfg)
                                              : make_block_scenario(cfg, seed);
}

NoisyTensor add_noise(const Tensor3D& t, std::optional<double> snr_db, std::uint64_t seed) {
  NoisyTensor out{t, 0.0};
  if (!snr_db) return out;
  const double n3 = static_cast<double>(t.n1()) * t.n2() * t.n3();
  const double sigma2 = frobenius_norm_sq(t) * std::pow(10.0, -*snr_db / 10.0) / n3;
  out.sigma2 = sigma2;
  const double sigma = std::sqrt(sigma2);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (auto& x : out.t.storage()) x += sigma * gauss(rng);
  return out;
}

double subspace_angle(const MatD& s1, const MatD& s2) {
  if (s1.rows() != s2.rows())
    throw std::invalid_argument("subspace_angle: row counts differ");
  auto orth = [](const MatD& m) {
    Eigen::ColPivHouseholderQR<MatD> qr(m);
    const Eigen::Index r = qr.rank();
    if (r == 0) throw std::invalid_argument("subspace_angle: rank-0 input");
    MatD q = qr.householderQ() * MatD::Identity(m.rows(), r);
    return q;
  };
  MatD q1 = orth(s1), q2 = orth(s2);
  if (q1.cols() > q2.cols()) std::swap(q1, q2);
  // largest principal angle via the projection residual, accurate near zero
  const MatD resid = q1 - q2 * (q2.transpose() * q1);
  const double s = resid.jacobiSvd().singularValues()(0);
  return std::asin(std::clamp(s, 0.0, 1.0));
}

namespace {

using ModeBlockSpans = std::array<std::vector<MatD>, 3>;

ModeBlockSpans spans_of(const TransformSet<double>& tr, const std::vector<int>& perm,
                        const std::vector<int>& sizes) {
  ModeBlockSpans spans;
  const int n = static_cast<int>(perm.size());
  for (int mode = 1; mode <= 3; ++mode) {
    const MatD& m = tr.mixing(mode);
    int off = 0;
    for (int s : sizes) {
      MatD cols(n, s);
      for (int c = 0; c < s; ++c) cols.col(c) = m.col(perm[off + c]);
      spans[mode - 1].push_back(std::move(cols));
      off += s;
    }
  }
  return spans;
}

std::vector<int> identity_perm(int n) {
  std::vector<int> p(n);
  for (int i = 0; i < n; ++i) p[i] = i;
  return p;
}

// minimal-cost injective assignment of truth blocks to estimated blocks;
// unmatched truth blocks cost (pi/2)^2 per mode. Exhaustive: block counts
// are small for every supported scenario.
std::vector<std::vector<double>> assign_blocks(const ModeBlockSpans& truth,
                                               const ModeBlockSpans& est) {
  const int bt = static_cast<int>(truth[0].size());
  const int be = static_cast<int>(est[0].size());
  const double penalty = M_PI / 2.0;

  // pairwise costs: [truth][est][mode] squared angle
  std::vector<std::vector<std::array<double, 3>>> cost(
      bt, std::vector<std::array<double, 3>>(be));
  for (int a = 0; a < bt; ++a)
    for (int b = 0; b < be; ++b)
      for (int mode = 0; mode < 3; ++mode) {
        const double ang = subspace_angle(truth[mode][a], est[mode][b]);
        cost[a][b][mode] = ang * ang;
      }

  std::vector<int> best_assign(bt, -1), cur(bt, -1);
  double best_total = std::numeric_limits<double>::infinity();
  std::vector<char> used(be, 0);

  auto total_of = [&](int a, int b) {
    if (b < 0) return 3.0 * penalty * penalty;
    return cost[a][b][0] + cost[a][b][1] + cost[a][b][2];
  };

  // depth-first over assignments with simple pruning
  auto rec = [&](auto&& self, int a, double acc) -> void {
    if (acc >= best_total) return;
    if (a == bt) {
      best_total = acc;
      best_assign = cur;
      return;
    }
    for (int b = 0; b < be; ++b) {
      if (used[b]) continue;
      used[b] = 1;
      cur[a] = b;
      self(self, a + 1, acc + total_of(a, b));
      used[b] = 0;
    }
    cur[a] = -1;
    self(self, a + 1, acc + total_of(a, -1));
  };
  rec(rec, 0, 0.0);

  std::vector<std::vector<double>> out(3, std::vector<double>(bt));
  for (int mode = 0; mode < 3; ++mode)
    for (int a = 0; a < bt; ++a) {
      const int b = best_assign[a];
      out[mode][a] = b >= 0 ? cost[a][b][mode] : penalty * penalty;
    }
  return out;
}

}  // namespace

std::vector<std::vector<double>> match_block_angles(const TransformSet<double>& truth,
                                                    const std::vector<int>& truth_sizes,
                                                    const TransformSet<double>& est,
                                                    const BlockStructure& est_blocks) {
  const int n = est_blocks.n();
  const ModeBlockSpans ts = spans_of(truth, identity_perm(n), truth_sizes);
  const ModeBlockSpans es = spans_of(est, est_blocks.perm, est_blocks.block_sizes);
  return assign_blocks(ts, es);
}

namespace {

int campaign_thread_cap() {
  int cap = static_cast<int>(std::thread::hardware_concurrency());
  if (cap < 1) cap = 1;
  if (const char* env = std::getenv("TEDIA_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) cap = v;
  }
  return cap;
}

TrialMetrics run_trial(const ScenarioConfig& cfg, int trial) {
  TrialMetrics m;
  m.trial = trial;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const std::uint64_t gen_seed = split_seed(cfg.seed, 2 * static_cast<std::uint64_t>(trial));
    const std::uint64_t noise_seed =
        split_seed(cfg.seed, 2 * static_cast<std::uint64_t>(trial) + 1);
    Scenario sc = make_scenario(cfg, gen_seed);
    const NoisyTensor noisy = add_noise(sc.t, cfg.snr_db, noise_seed);

    DiagonalizationResult<double> r = tedia(noisy.t, cfg.tedia);
    m.converged = r.converged;
    m.sweeps = r.sweeps_run;
    m.off_norm = r.off_norm_history.back();

    const SimilarityMatrices f = similarity(r.core);
    const BlockStructure bs = cluster_blocks(f, cfg.cluster_stop_ratio);

    if (cfg.refine) {
      const BtdModel init = from_tedia(r, bs);
      const AlsResult als = als_refine(noisy.t, init, 200, 1e-12);
      // estimated spans come from the refined factors
      ModeBlockSpans es;
      for (int mode = 0; mode < 3; ++mode) es[mode] = als.model.factors[mode];
      const ModeBlockSpans truth =
          spans_of(sc.transforms, identity_perm(cfg.n), sc.block_sizes);
      m.sq_angles = assign_blocks(truth, es);
    } else {
      m.sq_angles = match_block_angles(sc.transforms, sc.block_sizes, r.transforms, bs);
    }
  } catch (const std::exception& e) {
    m.failed = true;
    m.error = e.what();
  }
  m.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                  .count();
  return m;
}

}  // namespace

CampaignResult run_campaign(const ScenarioConfig& cfg) {
  cfg.validate();
  CampaignResult res;
  res.trials.resize(cfg.trials);

  const int pool = std::min(campaign_thread_cap(), cfg.trials);
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= cfg.trials) break;
      res.trials[static_cast<std::size_t>(i)] = run_trial(cfg, i);
    }
  };
  if (pool <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int p = 0; p < pool; ++p) threads.emplace_back(worker);
    for (auto& th : threads) th.join();
  }

  std::vector<double> sq;
  double wall = 0.0;
  for (const auto& t : res.trials) {
    if (t.failed) {
      ++res.failures;
      continue;
    }
    wall += t.wall_ms;
    for (const auto& per_mode : t.sq_angles)
      for (double v : per_mode) sq.push_back(v);
  }
  if (res.failures * 5 > cfg.trials)
    throw std::runtime_error("run_campaign: more than 20% of trials failed (" +
                             std::to_string(res.failures) + "/" +
                             std::to_string(cfg.trials) + ")");
  const int ok = cfg.trials - res.failures;
  if (!sq.empty()) {
    double mean = 0.0;
    for (double v : sq) mean += v;
    mean /= static_cast<double>(sq.size());
    std::vector<double> sorted = sq;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t h = sorted.size() / 2;
    const double median = sorted.size() % 2 ? sorted[h] : 0.5 * (sorted[h - 1] + sorted[h]);
    res.mean_sq_angle = mean;
    res.median_sq_angle = median;
    res.mean_sq_angle_db = 10.0 * std::log10(mean + 1e-300);
    res.median_sq_angle_db = 10.0 * std::log10(median + 1e-300);
  }
  res.mean_wall_ms = ok > 0 ? wall / ok : 0.0;
  return res;
}

}  // namespace tedia
