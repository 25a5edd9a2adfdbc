#pragma once

#include <chrono>
#include <stdexcept>
#include <string>

namespace rumdp {

class Timeout : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Wall-clock limit for one phase; a default-constructed deadline never expires.
class Deadline {
public:
    Deadline() = default;

    static Deadline after(double seconds) {
        Deadline d;
        if (seconds > 0.0) {
            d.active_ = true;
            d.end_ = std::chrono::steady_clock::now() +
                     std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                         std::chrono::duration<double>(seconds));
        }
        return d;
    }

    bool expired() const { return active_ && std::chrono::steady_clock::now() >= end_; }

    void check(const char* phase) const {
        if (expired()) throw Timeout(std::string("timeout during ") + phase);
    }

private:
    bool active_ = false;
    std::chrono::steady_clock::time_point end_{};
};

inline void poll(const Deadline* d, const char* phase) {
    if (d) d->check(phase);
}

} // namespace rumdp
