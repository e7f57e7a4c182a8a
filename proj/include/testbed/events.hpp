#pragma once

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "testbed/bus.hpp"
#include "testbed/bytes.hpp"
#include "testbed/sim_time.hpp"

namespace testbed {

using Json = nlohmann::json;

// Append-only run log: one JSON object per simulation event of interest
// (fault inception, attack start, trip chain milestones, alerts).
class EventLog {
public:
    void emit(const std::string& type, SimTime t, Json fields = Json::object()) {
        fields["event"] = type;
        fields["tNs"] = t;
        events_.push_back(std::move(fields));
    }

    const std::vector<Json>& records() const { return events_; }

    std::vector<Json> of_type(const std::string& type) const {
        std::vector<Json> out;
        for (const Json& e : events_)
            if (e.at("event") == type) out.push_back(e);
        return out;
    }

    std::string to_jsonl() const {
        std::string out;
        for (const Json& e : events_) {
            out += e.dump();
            out += '\n';
        }
        return out;
    }

    void write(const std::string& path) const {
        std::ofstream f(path);
        if (!f) throw std::runtime_error("cannot open for writing: " + path);
        f << to_jsonl();
        if (!f) throw std::runtime_error("write failed: " + path);
    }

private:
    std::vector<Json> events_;
};

enum class CaptureFormat { Pcap, Jsonl };

inline std::string capture_to_jsonl(const std::vector<CaptureRecord>& records) {
    std::string out;
    for (const CaptureRecord& rec : records) {
        Json line = {{"publishAtNs", rec.publishAt},
                     {"deliverAtNs", rec.deliverAt},
                     {"publisher", rec.publisher},
                     {"bytes", to_hex(*rec.frame)}};
        out += line.dump();
        out += '\n';
    }
    return out;
}

} // namespace testbed
