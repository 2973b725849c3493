#include "canard/sweep.hpp"

#include <omp.h>

namespace canard::sweep {

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body) {
    const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
    for (long long i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
}

void serial_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    for (std::size_t i = 0; i < n; ++i) body(i);
}

}  // namespace canard::sweep
