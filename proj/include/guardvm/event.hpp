// guardvm: segment-descriptor virtual machine and toolchain
// Copyright 2026 The guardvm Authors.
// Licensed under the Apache License, Version 2.0.
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "guardvm/core.hpp"

namespace gvm {

enum class EventKind : std::uint8_t {
    Step,
    Trap,
    Link,
    Gate,
    Fault,
    Alarm,
    Io,
    Halt,
};

std::string event_kind_name(EventKind k);

/// One trace event. Payload is an ordered key=value list; the order is fixed
/// per kind by the emitter so serialized traces are bit-stable.
struct Event {
    std::uint64_t step = 0;
    EventKind kind = EventKind::Step;
    std::vector<std::pair<std::string, std::string>> payload;

    const std::string* value(const std::string& key) const;
};

/// Serialized forms:
///   EV <step> <KIND> k=v k=v ...          (all kinds except Step)
///   STEP <step> <layer> <seg>+<hexoff> <mnemonic> [arg]
std::string format_event(const Event& e);
Event parse_event_line(const std::string& line);  // throws CoreError on bad input

/// Append-only run trace.
class EventLog {
public:
    void append(Event e);
    const std::vector<Event>& events() const { return events_; }
    std::size_t size() const { return events_.size(); }

    /// One line per event; Step lines included only when with_steps is set.
    std::string serialize(bool with_steps) const;
    static std::vector<Event> parse(const std::string& text);

private:
    std::vector<Event> events_;
};

}  // namespace gvm
