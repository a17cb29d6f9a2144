#include "qtraj/ensemble.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

namespace qtraj {

int worker_count() {
  if (const char* env = std::getenv(kWorkersEnv)) {
    try {
      std::size_t used = 0;
      const int n = std::stoi(env, &used);
      if (n > 0 && used == std::string(env).size()) return n;
    } catch (const std::exception&) {
    }
    throw InvalidArgument(std::string(kWorkersEnv) + " must be a positive integer, got '" + env + "'");
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, int workers) {
  if (n == 0) return;
  const auto threads = static_cast<std::size_t>(std::max(1, workers));
  if (threads == 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i; !failed.load() && (i = next.fetch_add(1)) < n;) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < std::min(threads, n); ++t) pool.emplace_back(worker);
  pool.clear();
  if (error) std::rethrow_exception(error);
}

std::vector<RunRecord> run_ensemble(const EnsembleInput& input, const ObservableSet& observables,
                                    std::size_t n_traj, int workers) {
  std::vector<RunRecord> records(n_traj);
  parallel_for(
      n_traj,
      [&](std::size_t i) {
        RunRecord& rec = records[i];
        rec.traj_id = std::to_string(i);
        rec.columns = observables.columns();
        auto hook = [&](double t, const Vec& psi) {
          rec.times.push_back(t);
          rec.values.push_back(observables.evaluate(psi));
        };
        auto result = run_trajectory(input.psi0, input.h0, input.channels, input.engine, i, hook, input.mode);
        rec.jumps = std::move(result.jumps);
      },
      workers);
  return records;
}

std::vector<DenseMatrix> ensemble_density(const EnsembleInput& input, std::size_t n_traj, int workers) {
  const auto times = sample_times(input.engine.t_final, input.engine.sample_interval);
  const Eigen::Index d = input.h0.dimension();
  std::vector<std::vector<Vec>> partial(n_traj);
  parallel_for(
      n_traj,
      [&](std::size_t i) {
        auto& mine = partial[i];
        run_trajectory(input.psi0, input.h0, input.channels, input.engine, i,
                       [&](double, const Vec& psi) { mine.push_back(psi); }, input.mode);
      },
      workers);
  std::vector<DenseMatrix> avg(times.size(), DenseMatrix::Zero(d, d));
  for (const auto& run : partial) {
    for (std::size_t k = 0; k < avg.size(); ++k) avg[k].noalias() += run[k] * run[k].adjoint();
  }
  for (auto& m : avg) m /= static_cast<double>(n_traj);
  return avg;
}

}  // namespace qtraj
