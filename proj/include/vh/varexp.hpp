#pragma once

#include "vh/grid.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace vh {

enum class ExponentClass { P0, P, HardyRange };

std::string to_string(ExponentClass c);

struct LogHolderReport {
    double local_constant = 0.0;
    double decay_constant = 0.0;
    double threshold = 0.0;
    bool pass = true;
};

// p(.) bound to a grid: samples, p-, p+ and the log-Holder constants are cached.
class ExponentFunction {
public:
    static constexpr double default_lh_threshold = 1.0;

    static ExponentFunction make(const Grid& grid, std::function<double(double)> evaluator,
                                 ExponentClass declared, std::string description = "custom");
    static ExponentFunction constant(const Grid& grid, double p);
    // values[i] on [breaks[i-1], breaks[i]) with breaks.size() == values.size() - 1.
    static ExponentFunction piecewise(const Grid& grid, std::vector<double> breaks,
                                      std::vector<double> values);
    // p_left for x <= x0, p_right for x >= x1, C^1 cubic smoothstep between.
    static ExponentFunction smoothstep(const Grid& grid, double p_left, double p_right,
                                       double x0, double x1);

    double operator()(double x) const { return eval_(x); }
    std::span<const double> samples() const { return samples_; }
    const Grid& grid() const { return grid_; }
    double p_minus() const { return p_minus_; }
    double p_plus() const { return p_plus_; }
    ExponentClass declared_class() const { return class_; }
    const LogHolderReport& log_holder() const { return lh_; }
    const std::string& description() const { return description_; }

    // Same evaluator resampled on another grid.
    ExponentFunction on(const Grid& grid) const;

private:
    ExponentFunction(Grid g) : grid_(g) {}
    Grid grid_;
    std::function<double(double)> eval_;
    std::vector<double> samples_;
    double p_minus_ = 0.0;
    double p_plus_ = 0.0;
    ExponentClass class_ = ExponentClass::P0;
    LogHolderReport lh_;
    std::string description_;
};

double modular(const SampledFunction& f, const ExponentFunction& p, double lambda);
double modular(std::span<const double> values, double h, std::span<const double> p, double lambda);

double luxemburg_norm(const SampledFunction& f, const ExponentFunction& p);
double luxemburg_norm(std::span<const double> values, double h, std::span<const double> p);

// Norm of the indicator of the sample window [first, first+count).
double indicator_norm(const ExponentFunction& p, std::size_t first, std::size_t count);

LogHolderReport check_log_holder(const ExponentFunction& p, const Grid& grid,
                                 double threshold = ExponentFunction::default_lh_threshold);

} // namespace vh
