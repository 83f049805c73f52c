#pragma once

namespace captune {

// Semantic scale shared by Level of Detail and Expressiveness.
inline constexpr double kValueMin = 1.0;
inline constexpr double kValueMax = 10.0;
// Symmetric slider range shown to creators.
inline constexpr double kSliderMin = -10.0;
inline constexpr double kSliderMax = 10.0;

struct ParamPoint {
    double detail = kValueMin;
    double expressiveness = kValueMin;

    bool operator==(const ParamPoint&) const = default;
};

bool in_scale(const ParamPoint& p);

// Slider-to-value calibration for one dimension. The mapping is two linear
// segments joined at the reference pair (s_ref, v_ref); with s_ref = 0 and
// v_ref = baseline it is the plain centered mapping.
struct DimensionCalibration {
    double v_min = kValueMin;
    double v_max = kValueMax;
    double s_min = kSliderMin;
    double s_max = kSliderMax;
    double s_ref = 0.0;
    double v_ref = kValueMin;

    static DimensionCalibration centered(double baseline);

    // s_min < s_ref < s_max and v_min <= v_ref <= v_max.
    bool valid() const;

    bool operator==(const DimensionCalibration&) const = default;
};

// Throws SliderOutOfRange when s is outside [s_min, s_max].
double map_slider(const DimensionCalibration& c, double s);

// Re-pins the mapping so that `current_slider` maps to `reestimated_value`.
// Endpoints are untouched. Throws DegenerateCalibration when the slider sits on
// (or beyond) an endpoint or the value falls outside [v_min, v_max], since
// either would break the two-segment shape.
DimensionCalibration recalibrate(const DimensionCalibration& c, double current_slider, double reestimated_value);

struct RatioPair {
    double r = 0.0;     // position between anchors, [0, 1]
    double delta = 0.0; // signed change relative to anchor width, [-1, 1]

    bool operator==(const RatioPair&) const = default;
};

// (v_new - lower) / (upper - lower). Throws OutOfAnchorBounds.
double interpolation_ratio(double v_new, double lower, double upper);

// (v_new - v_cur) / (upper - lower). Throws OutOfAnchorBounds.
double change_ratio(double v_new, double v_cur, double lower, double upper);

class TransformSpace {
public:
    // Validates lower <= baseline <= upper and lower < upper componentwise;
    // throws InvalidAnchorOrder otherwise. Calibrations default to centered on
    // the baseline.
    TransformSpace(ParamPoint baseline, ParamPoint lower_anchor, ParamPoint upper_anchor);
    TransformSpace(ParamPoint baseline, ParamPoint lower_anchor, ParamPoint upper_anchor,
                   DimensionCalibration calib_detail, DimensionCalibration calib_expr);

    // The whole semantic scale as the space, used for creator previews before
    // anchors exist.
    static TransformSpace full_scale(ParamPoint baseline);

    const ParamPoint& baseline() const { return baseline_; }
    const ParamPoint& lower_anchor() const { return lower_; }
    const ParamPoint& upper_anchor() const { return upper_; }
    const DimensionCalibration& calib_detail() const { return calib_detail_; }
    const DimensionCalibration& calib_expr() const { return calib_expr_; }

    void set_calibrations(DimensionCalibration detail, DimensionCalibration expr);

    bool contains(const ParamPoint& p) const;

    bool operator==(const TransformSpace&) const = default;

private:
    ParamPoint baseline_;
    ParamPoint lower_;
    ParamPoint upper_;
    DimensionCalibration calib_detail_;
    DimensionCalibration calib_expr_;
};

ParamPoint clamp_to_anchors(const TransformSpace& space, const ParamPoint& p);

} // namespace captune
