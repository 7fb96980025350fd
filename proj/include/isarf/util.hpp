#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace isarf {

/// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x);

/// Child seed for stream `index` of `master`. Used wherever work is split
/// into independently seeded units (trees, folds, groups, subjects) so the
/// result does not depend on execution order.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. fn must only write to
/// slots owned by i. The first exception thrown is rethrown on the caller.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

/// Shortest decimal string that parses back to the same double.
std::string format_shortest(double v);

/// printf("%.<digits>g")-equivalent.
std::string format_general(double v, int digits);

double parse_double(std::string_view s);
long long parse_integer(std::string_view s);

/// Warnings go to stderr unless silenced (tests silence them).
void log_warning(std::string_view message);
void set_warnings_enabled(bool enabled);

}  // namespace isarf
