#include "splitlab/kernels.hpp"

#include <atomic>
#include <stdexcept>
#include <string>

namespace splitlab::kernels {

#if defined(__x86_64__) || defined(_M_X64)
bool avx2_available() {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}
#endif

namespace {

const Ops* pick_auto() {
#if defined(__x86_64__) || defined(_M_X64)
    if (avx2_available()) return &avx2_ops;
#endif
    return &scalar_ops;
}

std::atomic<const Ops*> g_active{nullptr};

}  // namespace

const Ops& active() {
    const Ops* ops = g_active.load(std::memory_order_acquire);
    if (!ops) {
        ops = pick_auto();
        g_active.store(ops, std::memory_order_release);
    }
    return *ops;
}

void select_backend(std::string_view name) {
    if (name == "auto") {
        g_active.store(pick_auto(), std::memory_order_release);
        return;
    }
    if (name == "scalar") {
        g_active.store(&scalar_ops, std::memory_order_release);
        return;
    }
#if defined(__x86_64__) || defined(_M_X64)
    if (name == "avx2") {
        if (!avx2_available()) throw std::runtime_error("avx2 backend not supported by this CPU");
        g_active.store(&avx2_ops, std::memory_order_release);
        return;
    }
#endif
    throw std::invalid_argument("unknown kernel backend: " + std::string(name));
}

}  // namespace splitlab::kernels
