#pragma once

#include <limits>
#include <string>
#include <variant>
#include <vector>

namespace holoreg {

/// Magnetic-gradient segment shifting every stored wavenumber by +delta_k.
struct GradientPulse {
  double delta_k = 0.0;   // rad/m
  double duration = 0.0;  // s
};

enum class WindowProfile { Square, Ramp };

/// Spins brought into resonance with the cavity (detuning -> 0) for the
/// stated duration. Square switches the detuning suddenly; Ramp approximates
/// an adiabatic sweep by a staircase of sub-segments.
struct ResonanceWindow {
  double duration = 0.0;
  WindowProfile profile = WindowProfile::Square;
  int ramp_steps = 32;
  double ramp_fraction = 0.2;  // fraction of the duration spent on each ramp
};

/// CPB tuned to the stated detuning from the cavity for the duration
/// (0 = resonant exchange).
struct CpbWindow {
  double duration = 0.0;
  double detuning = 0.0;  // rad/s
};

/// Instantaneous rotation of the CPB by `angle` about the Bloch axis
/// (cos(axis_phase), sin(axis_phase), 0), optionally tilted toward z.
struct CpbDrive {
  double angle = 0.0;
  double axis_phase = 0.0;
  double axis_z = 0.0;  // z-component of the rotation axis (unnormalized)
  double duration = 0.0;  // bookkeeping only; applied as a delta pulse
};

/// Instantaneous refocusing pulse of nominal area pi applied to all spins.
/// `error` is the per-spin residual excitation amplitude: the applied
/// rotation angle is pi + 2*error, so a vacuum spin is left with excited
/// amplitude sin(error) after one pulse.
struct EchoPulse {
  double error = 0.0;
  double phase = 0.0;
};

struct Wait {
  double duration = 0.0;
};

using Segment = std::variant<GradientPulse, ResonanceWindow, CpbWindow, CpbDrive, EchoPulse, Wait>;

/// Ordered, timed pulse program for the exact engine.
struct PulseSchedule {
  std::vector<Segment> segments;
  /// Hardware bound on the field difference |delta_B| a gradient pulse may
  /// use across the sample; exceeding it is an error, never a silent clip.
  double max_field_difference = std::numeric_limits<double>::infinity();

  double total_duration() const;
  /// Signed sum of all gradient wavenumber shifts; zero for any schedule in
  /// which every excursion is unwound.
  double net_gradient_wavenumber() const;
  void validate() const;

  /// One human-readable line per segment: kind, parameters, duration.
  std::string to_text() const;
  static PulseSchedule from_text(const std::string& text);
};

const char* segment_kind_name(const Segment& segment);
double segment_duration(const Segment& segment);

}  // namespace holoreg
