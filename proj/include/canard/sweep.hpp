#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace canard::sweep {

/// Runs body(i) for i in [0, n) on up to `workers` OpenMP threads.
/// Exceptions escaping body terminate the program; callers catch per point.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body);

/// Reference implementation: plain loop in index order.
void serial_for(std::size_t n, const std::function<void(std::size_t)>& body);

template <class T>
struct Outcome {
    std::optional<T> value;
    std::string error;

    [[nodiscard]] bool ok() const { return value.has_value(); }
};

/// Evaluates f at every index; results are stored by index so the output is
/// independent of scheduling. A failing point records its error message.
template <class T>
std::vector<Outcome<T>> map(std::size_t n, int workers, const std::function<T(std::size_t)>& f) {
    std::vector<Outcome<T>> out(n);
    auto body = [&](std::size_t i) {
        try {
            out[i].value = f(i);
        } catch (const std::exception& e) {
            out[i].error = e.what();
        }
    };
    if (workers <= 1)
        serial_for(n, body);
    else
        parallel_for(n, workers, body);
    return out;
}

}  // namespace canard::sweep
