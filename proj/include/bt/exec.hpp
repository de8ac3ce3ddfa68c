#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bt/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bt {

/// Serial is the reference implementation; Parallel runs the same loop body
/// under OpenMP. Both must produce bit-identical results: loop bodies may
/// only write to their own index slot, and reductions happen afterwards in
/// index order.
enum class ExecMode { Serial, Parallel };

/// Worker cap: min(BT_THREADS, OpenMP max) when BT_THREADS is set, else the
/// OpenMP default. 1 when built without OpenMP.
int worker_count();

template <class F>
void for_each_index(std::size_t n, F&& f, ExecMode mode = ExecMode::Parallel) {
#ifdef _OPENMP
  const int threads = worker_count();
  if (mode == ExecMode::Parallel && threads > 1 && n > 1) {
#pragma omp parallel for schedule(static) num_threads(threads)
    for (long long i = 0; i < static_cast<long long>(n); ++i)
      f(static_cast<std::size_t>(i));
    return;
  }
#endif
  (void)mode;
  for (std::size_t i = 0; i < n; ++i) f(i);
}

/// Like for_each_index, but captures exceptions thrown by loop bodies
/// (OpenMP regions must not leak them) and rethrows for the smallest
/// failing index, prefixed "<item_name> <i>:".
template <class F>
void for_each_index_checked(std::size_t n, F&& f, ExecMode mode,
                            const char* item_name = "item") {
  std::vector<std::optional<std::pair<ErrorKind, std::string>>> failures(n);
  for_each_index(
      n,
      [&](std::size_t i) {
        try {
          f(i);
        } catch (const Error& e) {
          failures[i] = std::make_pair(e.kind(), std::string(e.what()));
        } catch (const std::exception& e) {
          failures[i] = std::make_pair(ErrorKind::Internal, std::string(e.what()));
        }
      },
      mode);
  for (std::size_t i = 0; i < n; ++i) {
    if (failures[i]) {
      throw Error(failures[i]->first, std::string(item_name) + " " +
                                          std::to_string(i) + ": " +
                                          failures[i]->second);
    }
  }
}

}  // namespace bt
