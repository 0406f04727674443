// SPDX-License-Identifier: Apache-2.0

#include "valuenet/uuid.hpp"

#include <cstdint>
#include <cstdio>
#include <random>

namespace valuenet::uuid {

std::string random_uuid() {
    thread_local std::mt19937_64 rng{std::random_device{}()};
    std::uint64_t hi = rng();
    std::uint64_t lo = rng();
    // version 4, RFC 4122 variant
    hi = (hi & 0xffffffffffff0fffULL) | 0x0000000000004000ULL;
    lo = (lo & 0x3fffffffffffffffULL) | 0x8000000000000000ULL;
    char buf[37];
    std::snprintf(buf, sizeof buf, "%08x-%04x-%04x-%04x-%012llx",
                  static_cast<unsigned>(hi >> 32), static_cast<unsigned>((hi >> 16) & 0xffff),
                  static_cast<unsigned>(hi & 0xffff), static_cast<unsigned>(lo >> 48),
                  static_cast<unsigned long long>(lo & 0xffffffffffffULL));
    return std::string(buf);
}

std::string urn_uuid() { return "urn:uuid:" + random_uuid(); }

}  // namespace valuenet::uuid
