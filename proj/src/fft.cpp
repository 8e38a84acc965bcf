#include "bspec/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <vector>

namespace bspec::fft {

namespace {

std::mutex g_plan_mutex;

// FFTW's planner is not thread-safe, and plan creation is not free; execution
// through fftw_execute_dft on caller buffers is safe once a plan exists.
std::map<std::pair<std::vector<int>, int>, fftw_plan>& plan_cache() {
    static std::map<std::pair<std::vector<int>, int>, fftw_plan> cache;
    return cache;
}

fftw_plan get_plan(int rank, const int* dims, int sign) {
    std::vector<int> key_dims(dims, dims + rank);
    std::pair<std::vector<int>, int> key{key_dims, sign};

    std::lock_guard<std::mutex> lock(g_plan_mutex);
    auto& cache = plan_cache();
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    std::size_t total = 1;
    for (int i = 0; i < rank; ++i) total *= static_cast<std::size_t>(dims[i]);
    std::vector<std::complex<double>> scratch(total);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan p = fftw_plan_dft(rank, dims, buf, buf,
                                sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
    cache.emplace(std::move(key), p);
    return p;
}

} // namespace

void dft(int rank, const int* dims, std::complex<double>* data, int sign) {
    fftw_plan p = get_plan(rank, dims, sign);
    auto* buf = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(p, buf, buf);
}

int next_fast_size(int n) {
    if (n < 1) return 1;
    for (int m = n;; ++m) {
        int r = m;
        while (r % 2 == 0) r /= 2;
        while (r % 3 == 0) r /= 3;
        while (r % 5 == 0) r /= 5;
        if (r == 1) return m;
    }
}

} // namespace bspec::fft
