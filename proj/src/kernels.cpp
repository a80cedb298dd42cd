#include "rml/kernels.hpp"

#include "rml/errors.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace rml::kernels {

const Table* avx2_table_impl(); // defined in kernels_avx2.cpp

bool avx2_available() {
#if defined(RML_HAVE_AVX2) && defined(__GNUC__)
    return avx2_table_impl() != nullptr && __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

const Table* avx2_table() { return avx2_available() ? avx2_table_impl() : nullptr; }

namespace {

std::atomic<const Table*> g_active{nullptr};

const Table* pick(std::string_view name) {
    if (name == "scalar") return &scalar_table();
    if (name == "avx2") {
        const Table* t = avx2_table();
        if (!t) throw ConfigError("kernel implementation 'avx2' is not available on this machine");
        return t;
    }
    if (name == "auto" || name.empty()) {
        const Table* t = avx2_table();
        return t ? t : &scalar_table();
    }
    throw ConfigError("unknown kernel implementation '" + std::string(name) +
                      "' (expected scalar, avx2 or auto)");
}

} // namespace

const Table& active() {
    const Table* t = g_active.load(std::memory_order_acquire);
    if (!t) {
        const char* env = std::getenv("RML_KERNEL_IMPL");
        t = pick(env ? std::string_view(env) : std::string_view("auto"));
        g_active.store(t, std::memory_order_release);
    }
    return *t;
}

void select(std::string_view name) { g_active.store(pick(name), std::memory_order_release); }

} // namespace rml::kernels
