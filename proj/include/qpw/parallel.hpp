#pragma once

#include <exception>

namespace qpw {

// OpenMP fan-out over [0, n).  The first exception thrown by any iteration is
// rethrown on the calling thread after the loop.
template <class F>
void parallel_for(int n, F&& body)
{
    std::exception_ptr err = nullptr;
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) {
        try {
            body(i);
        } catch (...) {
#pragma omp critical(qpw_parallel_error)
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
}

// Reference loop with identical semantics, kept for testing the parallel kernels.
template <class F>
void serial_for(int n, F&& body)
{
    for (int i = 0; i < n; ++i) body(i);
}

}  // namespace qpw
