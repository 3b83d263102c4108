#pragma once

#include <functional>
#include <iostream>
#include <string>
#include <utility>

namespace dcycle::log {

using Sink = std::function<void(const std::string&)>;

inline Sink& warning_sink() {
    static Sink sink = [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; };
    return sink;
}

inline void warn(const std::string& msg) {
    if (auto& sink = warning_sink()) sink(msg);
}

/// Redirects warnings for the lifetime of the guard.
class ScopedSink {
public:
    explicit ScopedSink(Sink sink) : previous_(std::exchange(warning_sink(), std::move(sink))) {}
    ~ScopedSink() { warning_sink() = std::move(previous_); }

    ScopedSink(const ScopedSink&) = delete;
    ScopedSink& operator=(const ScopedSink&) = delete;

private:
    Sink previous_;
};

}  // namespace dcycle::log
