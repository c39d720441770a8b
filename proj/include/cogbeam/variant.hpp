// SPDX-License-Identifier: Apache-2.0

#ifndef COGBEAM_VARIANT_HPP
#define COGBEAM_VARIANT_HPP

#include <stdexcept>
#include <string>

namespace cogbeam {

enum class VariantTag { CognitiveDfrc, NonCognitiveDfrc, RadarOnly, CommOnly };
enum class ObjectiveKind { BeamMse, TotalPower };

// ---------------------------------------------------------------------------
// Constraint-subset variants of the joint design problem. The comparison
// systems are expressed against the same machinery: the non-cognitive DFRC
// drops the interference cap, the radar-only design drops communication
// entirely, and the cognitive-comm-only design minimizes transmit power under
// SINR and interference constraints with no radar beams.
// ---------------------------------------------------------------------------
struct ProblemVariant {
    VariantTag tag = VariantTag::CognitiveDfrc;
    bool use_sinr = true;
    bool use_power = true;
    bool use_interference = true;
    bool has_comm = true;   // W columns present
    bool has_radar = true;  // V columns present
    ObjectiveKind objective = ObjectiveKind::BeamMse;

    static ProblemVariant cognitive_dfrc() { return {}; }
    static ProblemVariant non_cognitive_dfrc() {
        ProblemVariant v;
        v.tag = VariantTag::NonCognitiveDfrc;
        v.use_interference = false;
        return v;
    }
    static ProblemVariant radar_only() {
        ProblemVariant v;
        v.tag = VariantTag::RadarOnly;
        v.use_sinr = false;
        v.use_interference = false;
        v.has_comm = false;
        return v;
    }
    static ProblemVariant comm_only() {
        ProblemVariant v;
        v.tag = VariantTag::CommOnly;
        v.use_power = false;
        v.has_radar = false;
        v.objective = ObjectiveKind::TotalPower;
        return v;
    }

    const char* name() const {
        switch (tag) {
            case VariantTag::CognitiveDfrc: return "cognitive_dfrc";
            case VariantTag::NonCognitiveDfrc: return "non_cognitive_dfrc";
            case VariantTag::RadarOnly: return "radar_only";
            case VariantTag::CommOnly: return "comm_only";
        }
        return "?";
    }

    static ProblemVariant from_name(const std::string& name) {
        if (name == "cognitive_dfrc" || name == "cognitive") return cognitive_dfrc();
        if (name == "non_cognitive_dfrc" || name == "non_cognitive")
            return non_cognitive_dfrc();
        if (name == "radar_only") return radar_only();
        if (name == "comm_only") return comm_only();
        throw std::invalid_argument("unknown variant: " + name);
    }
};

}  // namespace cogbeam

#endif
