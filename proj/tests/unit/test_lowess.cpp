#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "psp/errors.hpp"
#include "psp/lowess.hpp"

using psp::LowessOptions;
using psp::lowess;

namespace {

// Reference values from the statsmodels implementation (frac 2/3, it 3,
// delta 0) on a noisy sine.
const std::vector<double> golden_x{
    0.014900835088361708, 0.30346007662471197, 0.85649167143624361, 0.90852713504257832,
    0.94128642240399185, 1.1367201992140341, 1.5973891463707857, 2.0719116808100124,
    2.1871542456880455, 2.368105065960997, 2.8420116374879143, 2.9272074901248715,
    2.9816309065742477, 2.9840122301687568, 3.139860020343368, 3.7424383347847079,
    3.9122819049566204, 4.3062802041417783, 4.3312694023647378, 4.7130966518183133,
    4.79051298140834, 5.167401826213637, 5.8216203606436778, 5.8516293989090808,
    5.8679857143814074, 6.3009019978534297, 6.4854720707982505, 6.6050006742789478,
    6.9621599667015541, 7.0696509565562344, 7.2216480814211748, 7.3457715140921458,
    7.3783778729216021, 7.4175668006933035, 7.7327700964881636, 8.0127446520639687,
    8.9171107044515718, 9.3146385474135442, 9.562672548360986, 9.7346027476641268};
const std::vector<double> golden_y{
    -0.48568566911984501, 0.38175769637524271, 0.9657124042917492, 0.6551686823573738,
    0.48539439648778077, 0.91509643472610991, 0.98382223933768043, 1.2987267367445436,
    1.0402116274654118, 0.75677947016571856, 0.62860987169509985, 0.15108979226060337,
    -0.11848942998674367, 0.33214656388742814, 0.17649415797623305, -0.62978891554936545,
    -0.93147246753206825, -0.84991878208536997, -1.676417062776379, -0.79296231855173782,
    -0.84953939381769383, -1.3899125260138825, -0.42694378406654304, -0.70751446365763371,
    -0.17620625955303962, -0.59253441816711638, -0.073438371411867626, 0.52916324840379936,
    0.97491573137238041, 0.060459590696687049, 0.6572385558375573, 0.97202291569737576,
    0.70625159502681012, 1.3834649787694477, 0.63529486694368653, 1.0937831856609388,
    0.17161837567485017, 0.53170575346553062, -0.14395336257518157, -0.41656693963987179};
const std::vector<double> golden_fit{
    1.0367375083604604, 0.96269925020120461, 0.80652385507470736, 0.79093505908946438,
    0.78104756873334003, 0.72093417857139108, 0.57261838354430494, 0.41242570663762879,
    0.37263446012368995, 0.30945828733771735, 0.13665807242025074, 0.10321342342771769,
    0.08110571925908315, 0.080122639323706363, 0.012225968563217362, -0.28544200959204691,
    -0.31287785843278565, -0.40955302835721202, -0.42042260479210003, -0.57053173093901155,
    -0.58768919114818652, -0.51028928814100738, -0.29325246943139954, -0.27519868311182732,
    -0.26535442409025561, -0.022994475321183427, 0.069541282216661712, 0.11594084504912058,
    0.19864083230845789, 0.21714726453843353, 0.24244484608104599, 0.26302350605731573,
    0.26845327895514676, 0.27499653252845963, 0.32807388969735685, 0.37493686772078472,
    0.50915908555967093, 0.5537665715037674, 0.57612291045238595, 0.58906099769471454};

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  return out;
}

} // namespace

TEST(Lowess, MatchesReferenceImplementation) {
  LowessOptions opts;
  opts.delta = 0.0;
  const auto fit = lowess(golden_x, golden_y, opts);
  ASSERT_EQ(fit.size(), golden_fit.size());
  for (std::size_t i = 0; i < fit.size(); ++i) EXPECT_NEAR(fit[i], golden_fit[i], 1e-8) << i;
}

TEST(Lowess, ReproducesConstantAndAffineData) {
  const auto xs = linspace(-2.0, 5.0, 37);
  std::vector<double> c(xs.size(), 3.25), line;
  for (double x : xs) line.push_back(0.5 - 1.75 * x);
  for (double v : lowess(xs, c)) EXPECT_NEAR(v, 3.25, 1e-10);
  const auto fit = lowess(xs, line);
  for (std::size_t i = 0; i < xs.size(); ++i) EXPECT_NEAR(fit[i], line[i], 1e-10);
}

TEST(Lowess, ReducesNoise) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> noise(0.0, 0.3);
  const auto xs = linspace(0.0, 6.0, 200);
  std::vector<double> ys;
  for (double x : xs) ys.push_back(std::sin(x) + noise(rng));
  LowessOptions opts;
  opts.span = 0.2;
  const auto fit = lowess(xs, ys, opts);
  double raw = 0.0, smooth = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    raw += std::pow(ys[i] - std::sin(xs[i]), 2);
    smooth += std::pow(fit[i] - std::sin(xs[i]), 2);
  }
  EXPECT_LT(smooth, 0.25 * raw);
}

TEST(Lowess, EquivariantUnderAffineResponseMaps) {
  LowessOptions opts;
  opts.delta = 0.0;
  std::vector<double> mapped;
  for (double y : golden_y) mapped.push_back(2.0 * y - 1.0);
  const auto fit = lowess(golden_x, mapped, opts);
  for (std::size_t i = 0; i < fit.size(); ++i) EXPECT_NEAR(fit[i], 2.0 * golden_fit[i] - 1.0, 1e-8);
}

TEST(Lowess, RejectsBadInput) {
  EXPECT_THROW(lowess(std::vector<double>{1.0}, std::vector<double>{1.0}), psp::UsageError);
  EXPECT_THROW(lowess(std::vector<double>{1.0, 2.0}, std::vector<double>{1.0}), psp::UsageError);
  EXPECT_THROW(lowess(std::vector<double>{2.0, 1.0}, std::vector<double>{1.0, 1.0}), psp::UsageError);
  LowessOptions opts;
  opts.span = 1.5;
  EXPECT_THROW(lowess(golden_x, golden_y, opts), psp::UsageError);
}
