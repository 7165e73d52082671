#include "windregime/parallel.hpp"

namespace windregime {

namespace {
std::atomic<unsigned> g_max_threads{1};
}

void set_max_threads(unsigned n)
{
    g_max_threads = n == 0 ? std::max(1u, std::thread::hardware_concurrency()) : n;
}

unsigned max_threads()
{
    return g_max_threads;
}

} // namespace windregime
