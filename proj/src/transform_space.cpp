#include "captune/transform_space.hpp"

#include "captune/error.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace captune {

namespace {

// Slack for values that went through arithmetic on the way in (7.2 from the
// slider map compared against an anchor of 7.2).
constexpr double kSlack = 1e-9;

nlohmann::json point_json(const ParamPoint& p) {
    return {{"detail", p.detail}, {"expressiveness", p.expressiveness}};
}

void require_anchor_span(double lower, double upper) {
    if (!(lower < upper)) {
        throw Error(ErrorCode::InvalidAnchorOrder, fmt::format("lower anchor {} must be below upper anchor {}", lower, upper),
                    {{"lower", lower}, {"upper", upper}});
    }
}

void require_within(double v, double lower, double upper, const char* what) {
    if (v < lower - kSlack || v > upper + kSlack) {
        throw Error(ErrorCode::OutOfAnchorBounds, fmt::format("{} {} is outside anchors [{}, {}]", what, v, lower, upper),
                    {{"value", v}, {"lower", lower}, {"upper", upper}});
    }
}

} // namespace

bool in_scale(const ParamPoint& p) {
    return p.detail >= kValueMin && p.detail <= kValueMax && p.expressiveness >= kValueMin &&
           p.expressiveness <= kValueMax;
}

DimensionCalibration DimensionCalibration::centered(double baseline) {
    DimensionCalibration c;
    c.v_ref = baseline;
    return c;
}

bool DimensionCalibration::valid() const {
    return s_min < s_ref && s_ref < s_max && v_min <= v_ref && v_ref <= v_max;
}

double map_slider(const DimensionCalibration& c, double s) {
    if (s < c.s_min || s > c.s_max) {
        throw Error(ErrorCode::SliderOutOfRange, fmt::format("slider {} outside [{}, {}]", s, c.s_min, c.s_max),
                    {{"slider", s}});
    }
    if (s < c.s_ref) {
        return c.v_min + (s - c.s_min) / (c.s_ref - c.s_min) * (c.v_ref - c.v_min);
    }
    if (s > c.s_ref) {
        return c.v_ref + (s - c.s_ref) / (c.s_max - c.s_ref) * (c.v_max - c.v_ref);
    }
    return c.v_ref;
}

DimensionCalibration recalibrate(const DimensionCalibration& c, double current_slider, double reestimated_value) {
    if (!(current_slider > c.s_min && current_slider < c.s_max)) {
        throw Error(ErrorCode::DegenerateCalibration,
                    fmt::format("cannot pin slider position {} (must lie strictly inside [{}, {}])", current_slider,
                                c.s_min, c.s_max),
                    {{"slider", current_slider}});
    }
    if (reestimated_value < c.v_min || reestimated_value > c.v_max) {
        throw Error(ErrorCode::DegenerateCalibration,
                    fmt::format("value {} outside [{}, {}]", reestimated_value, c.v_min, c.v_max),
                    {{"value", reestimated_value}});
    }
    DimensionCalibration out = c;
    out.s_ref = current_slider;
    out.v_ref = reestimated_value;
    return out;
}

double interpolation_ratio(double v_new, double lower, double upper) {
    require_anchor_span(lower, upper);
    require_within(v_new, lower, upper, "value");
    return std::clamp((v_new - lower) / (upper - lower), 0.0, 1.0);
}

double change_ratio(double v_new, double v_cur, double lower, double upper) {
    require_anchor_span(lower, upper);
    require_within(v_new, lower, upper, "requested value");
    require_within(v_cur, lower, upper, "current value");
    return std::clamp((v_new - v_cur) / (upper - lower), -1.0, 1.0);
}

TransformSpace::TransformSpace(ParamPoint baseline, ParamPoint lower_anchor, ParamPoint upper_anchor)
    : TransformSpace(baseline, lower_anchor, upper_anchor, DimensionCalibration::centered(baseline.detail),
                     DimensionCalibration::centered(baseline.expressiveness)) {}

TransformSpace::TransformSpace(ParamPoint baseline, ParamPoint lower_anchor, ParamPoint upper_anchor,
                               DimensionCalibration calib_detail, DimensionCalibration calib_expr)
    : baseline_(baseline), lower_(lower_anchor), upper_(upper_anchor) {
    const nlohmann::json details = {
        {"baseline", point_json(baseline)}, {"lower", point_json(lower_anchor)}, {"upper", point_json(upper_anchor)}};
    if (!in_scale(baseline) || !in_scale(lower_anchor) || !in_scale(upper_anchor)) {
        throw Error(ErrorCode::InvalidAnchorOrder, "anchors and baseline must lie on the 1-10 scale", details);
    }
    if (!(lower_.detail < upper_.detail && lower_.expressiveness < upper_.expressiveness)) {
        throw Error(ErrorCode::InvalidAnchorOrder, "lower anchor must be strictly below upper anchor on both dimensions",
                    details);
    }
    if (!contains(baseline_)) {
        throw Error(ErrorCode::InvalidAnchorOrder, "baseline must lie between the anchors", details);
    }
    set_calibrations(calib_detail, calib_expr);
}

TransformSpace TransformSpace::full_scale(ParamPoint baseline) {
    return TransformSpace(baseline, {kValueMin, kValueMin}, {kValueMax, kValueMax});
}

void TransformSpace::set_calibrations(DimensionCalibration detail, DimensionCalibration expr) {
    if (!detail.valid() || !expr.valid()) {
        throw Error(ErrorCode::DegenerateCalibration, "slider calibration violates s_min < s_ref < s_max or value range");
    }
    calib_detail_ = detail;
    calib_expr_ = expr;
}

bool TransformSpace::contains(const ParamPoint& p) const {
    return p.detail >= lower_.detail && p.detail <= upper_.detail && p.expressiveness >= lower_.expressiveness &&
           p.expressiveness <= upper_.expressiveness;
}

ParamPoint clamp_to_anchors(const TransformSpace& space, const ParamPoint& p) {
    return {std::clamp(p.detail, space.lower_anchor().detail, space.upper_anchor().detail),
            std::clamp(p.expressiveness, space.lower_anchor().expressiveness, space.upper_anchor().expressiveness)};
}

} // namespace captune
