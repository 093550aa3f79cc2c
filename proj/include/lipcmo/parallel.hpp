#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace lipcmo {

void set_thread_count(int k);
int thread_count();

// Runs chunk(t, a, b) for a static split of [0, n) into at most
// thread_count() ranges. Thread t always owns the same range.
template <class F>
void run_chunks(Eigen::Index n, F&& chunk)
{
    Eigen::Index k = std::min<Eigen::Index>(thread_count(), n / 32);
    if (k <= 1) {
        chunk(0, Eigen::Index(0), n);
        return;
    }
    const Eigen::Index step = (n + k - 1) / k;
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(k);
    for (Eigen::Index t = 0; t < k; ++t) {
        pool.emplace_back([&, t] {
            try {
                chunk(t, t * step, std::min(n, (t + 1) * step));
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool)
        th.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

template <class F>
void parallel_for(Eigen::Index n, F&& body)
{
    run_chunks(n, [&](Eigen::Index, Eigen::Index a, Eigen::Index b) {
        for (Eigen::Index i = a; i < b; ++i)
            body(i);
    });
}

// Max is order independent, so the result does not depend on the split.
template <class F>
double parallel_max(Eigen::Index n, F&& value, double init = 0.0)
{
    std::vector<double> partial(std::max(1, thread_count()), init);
    run_chunks(n, [&](Eigen::Index t, Eigen::Index a, Eigen::Index b) {
        double m = init;
        for (Eigen::Index i = a; i < b; ++i)
            m = std::max(m, value(i));
        partial[t] = m;
    });
    return *std::max_element(partial.begin(), partial.end());
}

// Pairwise tree sum; the summation shape depends only on the range.
template <class F>
double tree_sum(Eigen::Index lo, Eigen::Index hi, F&& term)
{
    if (hi - lo <= 16) {
        double s = 0.0;
        for (Eigen::Index i = lo; i < hi; ++i)
            s += term(i);
        return s;
    }
    const Eigen::Index mid = lo + (hi - lo) / 2;
    return tree_sum(lo, mid, term) + tree_sum(mid, hi, term);
}

} // namespace lipcmo
