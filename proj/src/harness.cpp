// SPDX-License-Identifier: Apache-2.0
#include "otfsnoma/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <memory>
#include <mutex>
#include <thread>

#include "otfsnoma/baseline.hpp"
#include "otfsnoma/channel.hpp"
#include "otfsnoma/waveform.hpp"

namespace otfsnoma {

std::pair<double, double> ftpa_allocate(double snr1_db, double snr2_db) {
  const double g1 = std::pow(10.0, snr1_db / 10.0), g2 = std::pow(10.0, snr2_db / 10.0);
  return {g2 / (g1 + g2), g1 / (g1 + g2)};
}

DetectorConfig detector_config(const SimConfig& cfg, Scheme scheme, int user) {
  DetectorConfig d;
  d.user = user;
  d.K = cfg.K;
  d.policy = scheme == Scheme::ProposedNaive ? ThresholdPolicy::Naive : ThresholdPolicy::Optimized;
  d.naive_start_factor = cfg.naive_start_factor;
  d.zone_rule = cfg.zone_rule;
  d.solver.max_iter = cfg.U;
  d.solver.tol = cfg.epsilon;
  d.solver.mode = MseMode::Approx;
  return d;
}

Rng trial_rng(std::uint64_t master_seed, int trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed & 0xffffffffu),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(trial)};
  return Rng(seq);
}

namespace {

Eigen::VectorXcd draw_symbols(const QamConstellation& c, Eigen::Index n, Rng& rng) {
  std::uniform_int_distribution<int> pick(0, c.order() - 1);
  Eigen::VectorXcd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = c.points()[pick(rng)];
  return x;
}

ChannelRealization identity_realization() {
  ChannelRealization ch;
  ch.paths.push_back({cplx(1.0, 0.0), 0, 0.0});
  ch.pdp.push_back(1.0);
  return ch;
}

std::uint64_t count_errors(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  std::uint64_t e = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) e += a[i] != b[i];
  return e;
}

using Clock = std::chrono::steady_clock;

}  // namespace

TrialCounts run_trial(const SimConfig& cfg, const PointSpec& point, Rng& rng) {
  const FrameConfig frame = cfg.resolved_frame();
  const Eigen::Index mn = frame.grid_size();
  const QamConstellation c1(cfg.qam_order_1), c2(cfg.qam_order_2);

  const double snr2_db = point.snr_db_user1 + cfg.snr_gap_db;
  const auto [rho1, rho2] = ftpa_allocate(point.snr_db_user1, snr2_db);
  const std::array<double, 2> sigma2{point.noiseless ? 0.0 : snr_to_sigma2(point.snr_db_user1),
                                     point.noiseless ? 0.0 : snr_to_sigma2(snr2_db)};

  const Eigen::VectorXcd x1 = draw_symbols(c1, mn, rng);
  const Eigen::VectorXcd x2 = draw_symbols(c2, mn, rng);
  const std::array<const Eigen::VectorXcd*, 2> truth{&x1, &x2};
  const Eigen::VectorXcd s = otfs_modulate(superimpose(x1, x2, rho1, rho2), frame);

  std::array<ChannelRealization, 2> ch;
  for (auto& c : ch)
    c = point.identity_channel ? identity_realization()
                               : sample_tdlc(cfg.delay_spread_s, point.v_max_hz, frame, rng);

  TrialCounts out;
  out.errors.assign(cfg.schemes.size(), {0, 0});
  out.seconds.assign(cfg.schemes.size(), 0.0);
  out.symbols_per_user = static_cast<std::uint64_t>(mn);

  for (int i = 0; i < 2; ++i) {
    // noise drawn with unit variance and scaled, so every SNR sees the same direction
    const Eigen::VectorXcd r = apply_ltv_channel(s, ch[i], frame, cfg.channel_mode);
    const Eigen::VectorXcd w = add_awgn(Eigen::VectorXcd::Zero(r.size()), 1.0, rng);
    const Eigen::VectorXcd y = otfs_demodulate(r + std::sqrt(sigma2[i]) * w, frame);

    auto dt = std::make_shared<const DelayTimeChannel>(ch[i], frame, cfg.channel_mode);
    const LinearOperator<double> G = effective_channel_operator(dt);
    const Eigen::VectorXcd g0 = first_column(G);

    for (std::size_t si = 0; si < cfg.schemes.size(); ++si) {
      const auto t0 = Clock::now();
      Eigen::VectorXcd xhat;
      if (cfg.schemes[si] == Scheme::MmseSic) {
        // sigma^2 = 0 is taken as the zero-forcing limit
        const auto eq = std::make_shared<const BlockMmseEqualizer>(dt, std::max(sigma2[i], 1e-12));
        xhat = mmse_sic_detect(
            y, [eq](const Eigen::VectorXcd& v) { return eq->equalize(v); }, G, i + 1, rho1, rho2,
            c1, c2);
      } else {
        const DetectorConfig dc = detector_config(cfg, cfg.schemes[si], i + 1);
        xhat = detect(G, g0, frame.M, frame.N, y, rho1, rho2, sigma2[i], dc, c1, c2).x_hat_user;
      }
      out.seconds[si] += std::chrono::duration<double>(Clock::now() - t0).count();
      out.errors[si][i] = count_errors(xhat, *truth[i]);
    }
  }
  return out;
}

std::vector<ResultRecord> run_sweep(const SimConfig& cfg, const ProgressFn& progress) {
  cfg.validate();
  const std::vector<double> dopplers = cfg.doppler_sweep();
  const std::size_t n_points = dopplers.size() * cfg.snr_db_user1.size();
  const std::size_t n_jobs = n_points * static_cast<std::size_t>(cfg.trials);
  const std::size_t n_schemes = cfg.schemes.size();

  struct Acc {
    std::vector<std::array<std::uint64_t, 2>> errors;
    std::vector<double> seconds;
  };
  std::vector<Acc> acc(n_points, Acc{std::vector<std::array<std::uint64_t, 2>>(n_schemes, {0, 0}),
                                     std::vector<double>(n_schemes, 0.0)});
  std::uint64_t symbols_per_trial = static_cast<std::uint64_t>(cfg.resolved_frame().grid_size());

  std::atomic<std::size_t> next{0}, done{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex mu;

  auto worker = [&] {
    std::vector<Acc> local(acc.size(), acc.front());
    for (auto& a : local) {
      for (auto& e : a.errors) e = {0, 0};
      for (auto& t : a.seconds) t = 0.0;
    }
    try {
      for (std::size_t job; !failed && (job = next++) < n_jobs;) {
        const std::size_t p = job / static_cast<std::size_t>(cfg.trials);
        const int trial = static_cast<int>(job % static_cast<std::size_t>(cfg.trials));
        PointSpec pt;
        pt.v_max_hz = dopplers[p / cfg.snr_db_user1.size()];
        pt.snr_db_user1 = cfg.snr_db_user1[p % cfg.snr_db_user1.size()];
        Rng rng = trial_rng(cfg.seed, trial);
        const TrialCounts tc = run_trial(cfg, pt, rng);
        for (std::size_t s = 0; s < n_schemes; ++s) {
          local[p].errors[s][0] += tc.errors[s][0];
          local[p].errors[s][1] += tc.errors[s][1];
          local[p].seconds[s] += tc.seconds[s];
        }
        const std::size_t d = ++done;
        if (progress) {
          std::lock_guard<std::mutex> lock(mu);
          progress(d, n_jobs);
        }
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(mu);
      if (!error) error = std::current_exception();
      failed = true;
    }
    std::lock_guard<std::mutex> lock(mu);
    for (std::size_t p = 0; p < acc.size(); ++p)
      for (std::size_t s = 0; s < n_schemes; ++s) {
        acc[p].errors[s][0] += local[p].errors[s][0];
        acc[p].errors[s][1] += local[p].errors[s][1];
        acc[p].seconds[s] += local[p].seconds[s];
      }
  };

  const int n_threads = std::max(1, std::min<int>(cfg.threads, static_cast<int>(n_jobs)));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  std::vector<ResultRecord> records;
  for (std::size_t p = 0; p < n_points; ++p) {
    for (std::size_t s = 0; s < n_schemes; ++s) {
      for (int u = 0; u < 2; ++u) {
        ResultRecord r;
        r.v_max_hz = dopplers[p / cfg.snr_db_user1.size()];
        r.snr_db = cfg.snr_db_user1[p % cfg.snr_db_user1.size()];
        r.scheme = to_string(cfg.schemes[s]);
        r.user = u + 1;
        r.symbol_errors = acc[p].errors[s][u];
        r.symbols = symbols_per_trial * static_cast<std::uint64_t>(cfg.trials);
        r.ser = static_cast<double>(r.symbol_errors) / static_cast<double>(r.symbols);
        r.trials = cfg.trials;
        r.wall_time_s = acc[p].seconds[s];
        records.push_back(std::move(r));
      }
    }
  }
  return records;
}

std::vector<ApproxErrorPoint> approx_error_experiment(const ApproxErrorConfig& cfg) {
  FrameConfig frame{cfg.M, cfg.N, 0, cfg.delta_f, cfg.f_c};
  frame.n_cp = tdlc_max_tap(cfg.delay_spread_s, frame);
  frame.validate();
  const Eigen::Index mn = frame.grid_size();
  if (mn > cfg.exact_cap)
    throw ConfigError("approx_error_experiment: M*N = " + std::to_string(mn) +
                      " exceeds the exact-MSE cap " + std::to_string(cfg.exact_cap));
  if (cfg.realizations < 1) throw ConfigError("approx_error_experiment: realizations must be >= 1");

  std::vector<double> velocities;
  if (cfg.include_static) velocities.push_back(0.0);
  velocities.insert(velocities.end(), cfg.velocity_kmh.begin(), cfg.velocity_kmh.end());

  const QamConstellation c(cfg.qam_order);
  const auto [rho1, rho2] = ftpa_allocate(cfg.snr_db, cfg.snr_db + cfg.snr_gap_db);
  const double sigma2 = snr_to_sigma2(cfg.snr_db);
  MlsqrOptions opts;
  opts.max_iter = cfg.U;
  opts.tol = cfg.epsilon;
  opts.mode = MseMode::Exact;
  opts.exact_cap = cfg.exact_cap;

  std::vector<ApproxErrorPoint> out;
  for (double v : velocities) {
    const double nu = velocity_to_doppler(v, cfg.f_c);
    std::vector<double> es(static_cast<std::size_t>(cfg.realizations), 0.0);
    const int n_threads = std::max(1, std::min(cfg.threads, cfg.realizations));
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex mu;
    auto worker = [&] {
      try {
        for (int r; (r = next++) < cfg.realizations;) {
          Rng rng = trial_rng(cfg.seed, r);
          const Eigen::VectorXcd x =
              superimpose(draw_symbols(c, mn, rng), draw_symbols(c, mn, rng), rho1, rho2);
          const ChannelRealization ch = sample_tdlc(cfg.delay_spread_s, nu, frame, rng);
          auto dt = std::make_shared<const DelayTimeChannel>(ch, frame);
          const LinearOperator<double> G = effective_channel_operator(dt);
          const Eigen::VectorXcd y = add_awgn(G.apply(x), sigma2, rng);
          const auto rep = mlsqr<double>(G, first_column(G), y, sigma2, rho1, rho2, opts,
                                         frame.M, frame.N);
          const double e = (rep.exact->gamma.array() - rep.approx->gamma).abs2().sum() /
                           static_cast<double>(mn);
          es[static_cast<std::size_t>(r)] = e;
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
        next = cfg.realizations;
      }
    };
    if (n_threads == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
    }
    if (error) std::rethrow_exception(error);
    double total = 0.0;
    for (double e : es) total += e;
    out.push_back({v, nu, total / cfg.realizations});
  }
  return out;
}

}  // namespace otfsnoma
