#include "symadex/common.hpp"

namespace symadex::effort {

namespace {
thread_local std::uint64_t counter = 0;
}

std::uint64_t read() noexcept { return counter; }

void add(std::uint64_t units) noexcept { counter += units; }

}  // namespace symadex::effort
