// guardvm: segment-descriptor virtual machine and toolchain
// Copyright 2026 The guardvm Authors.
// Licensed under the Apache License, Version 2.0.
#include "guardvm/event.hpp"

#include <sstream>

namespace gvm {

std::string event_kind_name(EventKind k) {
    switch (k) {
    case EventKind::Step: return "STEP";
    case EventKind::Trap: return "TRAP";
    case EventKind::Link: return "LINK";
    case EventKind::Gate: return "GATE";
    case EventKind::Fault: return "FAULT";
    case EventKind::Alarm: return "ALARM";
    case EventKind::Io: return "IO";
    case EventKind::Halt: return "HALT";
    }
    return "?";
}

static EventKind kind_from_name(const std::string& s) {
    for (int k = 0; k <= static_cast<int>(EventKind::Halt); ++k)
        if (event_kind_name(static_cast<EventKind>(k)) == s)
            return static_cast<EventKind>(k);
    throw CoreError("unknown event kind: " + s);
}

const std::string* Event::value(const std::string& key) const {
    for (const auto& [k, v] : payload)
        if (k == key) return &v;
    return nullptr;
}

std::string format_event(const Event& e) {
    std::ostringstream os;
    if (e.kind == EventKind::Step) {
        os << "STEP " << e.step;
        const std::string* layer = e.value("layer");
        const std::string* loc = e.value("loc");
        const std::string* op = e.value("op");
        const std::string* arg = e.value("arg");
        os << ' ' << (layer ? *layer : "?") << ' ' << (loc ? *loc : "?") << ' '
           << (op ? *op : "?");
        if (arg != nullptr && !arg->empty()) os << ' ' << *arg;
        return os.str();
    }
    os << "EV " << e.step << ' ' << event_kind_name(e.kind);
    for (const auto& [k, v] : e.payload) os << ' ' << k << '=' << v;
    return os.str();
}

Event parse_event_line(const std::string& line) {
    std::istringstream is(line);
    std::string head;
    is >> head;
    Event e;
    if (head == "STEP") {
        std::string layer, loc, op, arg;
        if (!(is >> e.step >> layer >> loc >> op))
            throw CoreError("malformed STEP line: " + line);
        std::getline(is, arg);
        while (!arg.empty() && arg.front() == ' ') arg.erase(arg.begin());
        e.kind = EventKind::Step;
        e.payload = {{"layer", layer}, {"loc", loc}, {"op", op}, {"arg", arg}};
        return e;
    }
    if (head != "EV") throw CoreError("malformed event line: " + line);
    std::string kind;
    if (!(is >> e.step >> kind)) throw CoreError("malformed event line: " + line);
    e.kind = kind_from_name(kind);
    std::string kv;
    while (is >> kv) {
        auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw CoreError("malformed payload in event line: " + line);
        e.payload.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
    }
    return e;
}

void EventLog::append(Event e) {
    if (!events_.empty() && e.step < events_.back().step)
        throw CoreError("event step numbers must be nondecreasing");
    events_.push_back(std::move(e));
}

std::string EventLog::serialize(bool with_steps) const {
    std::string out;
    for (const Event& e : events_) {
        if (e.kind == EventKind::Step && !with_steps) continue;
        out += format_event(e);
        out += '\n';
    }
    return out;
}

std::vector<Event> EventLog::parse(const std::string& text) {
    std::vector<Event> out;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        out.push_back(parse_event_line(line));
    }
    return out;
}

}  // namespace gvm
