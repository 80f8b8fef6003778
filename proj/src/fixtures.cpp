#include "posobs/fixtures.hpp"

namespace posobs {

ProblemFile continuous_example() {
    std::vector<Mat> lower{
        {{-23, 4, 1, 4, 1}, {6, -28, 8, 6, 8}, {4, 4, -25, 4, 6}, {7, 5, 6, -26, 3}, {5, 4, 2, 6, -29}},
        {{-28, 6, 3, 1, 4}, {1, -24, 6, 3, 1}, {6, 5, -29, 8, 3}, {4, 8, 3, -23, 2}, {3, 4, 2, 2, -22}},
        {{-28, 10, 1, 4, 4}, {1, -27, 8, 6, 3}, {2, 4, -29, 8, 3}, {4, 2, 5, -26, 9}, {1, 3, 8, 5, -28}},
    };
    std::vector<Mat> upper{
        {{-22, 5, 2, 5, 3}, {8, -26, 9, 7, 9}, {7, 6, -24, 6, 7}, {8, 6, 8, -24, 4}, {8, 5, 5, 7, -27}},
        {{-26, 9, 4, 2, 5}, {3, -22, 7, 4, 3}, {8, 7, -27, 10, 6}, {6, 10, 7, -19, 4}, {5, 6, 4, 3, -18}},
        {{-26, 13, 3, 6, 6}, {3, -25, 9, 7, 4}, {4, 7, -26, 10, 4}, {6, 4, 7, -24, 12}, {2, 5, 9, 6, -26}},
    };
    ProblemFile pf;
    pf.system = make_interval_system(Domain::continuous, 2, std::move(lower), std::move(upper), {1, 3, 6, 2, 3},
                                     {6, 5, 9, 8, 5});
    TrueSystem truth;
    truth.a = {
        {{-22.13, 4.64, 1.76, 4.21, 1.08},
         {7.18, -26.20, 8.40, 6.08, 8.90},
         {6.31, 4.66, -24.04, 5.18, 6.18},
         {7.75, 5.49, 7.22, -25.48, 3.72},
         {5.39, 4.23, 3.05, 6.58, -28.76}},
        {{-27.04, 6.72, 3.97, 1.61, 4.36},
         {2.48, -22.74, 6.00, 3.12, 1.18},
         {7.06, 6.50, -28.84, 9.16, 3.54},
         {5.28, 9.70, 5.28, -19.52, 3.22},
         {4.92, 5.34, 2.68, 2.13, -18.28}},
        {{-26.52, 10.09, 2.06, 5.98, 4.76},
         {1.02, -25.66, 8.05, 6.85, 3.03},
         {2.90, 6.04, -28.31, 9.86, 3.77},
         {5.10, 2.76, 5.86, -24.26, 10.05},
         {1.36, 3.86, 8.14, 5.39, -27.60}},
    };
    truth.x0 = {4.45, 3.42, 6.33, 7.64, 4.72};
    pf.truth = std::move(truth);
    pf.observer = ObserverSpec{Mat{{0.1, 0.4}, {0.15, 0.2}, {0.1, 0.05}}, {1, 0, 1}, {8, 8, 9}};
    pf.switching = SwitchingSpec{42, kDefaultMinDwell, kDefaultHorizon, std::nullopt};
    pf.step = kDefaultStep;
    return pf;
}

ProblemFile discrete_example() {
    std::vector<Mat> lower{
        {{.03, .07, .01, .14}, {.12, .13, .02, .08}, {.07, .03, .01, .04}, {.08, .02, .21, .11}},
        {{.11, .02, .22, .01}, {.03, .03, .01, .09}, {.04, .11, .03, .12}, {.03, .01, .03, .03}},
        {{.09, .09, .02, .31}, {.03, .08, .09, .08}, {.06, .12, .18, .04}, {.13, .04, .07, .09}},
    };
    std::vector<Mat> upper{
        {{.2, .15, .3, .4}, {.3, .4, .2, .14}, {.3, .2, .1, .16}, {.2, .25, .4, .3}},
        {{.4, .3, .6, .3}, {.2, .2, .1, .22}, {.25, .4, .2, .36}, {.15, .1, .1, .12}},
        {{.32, .18, .30, .52}, {.22, .24, .17, .22}, {.15, .31, .32, .13}, {.33, .27, .21, .13}},
    };
    ProblemFile pf;
    pf.comment =
        "Bound matrices are assigned positionally as (A_lower[1], A_upper[1], A_lower[2], A_upper[2], "
        "A_lower[3], A_upper[3]) in order of appearance in the source listing, which repeats one label.";
    pf.system = make_interval_system(Domain::discrete, 2, std::move(lower), std::move(upper), {1, 3, 3, 2},
                                     {8, 6, 11, 7});
    TrueSystem truth;
    truth.a = {
        {{.05, .13, .18, .34}, {.27, .13, .12, .10}, {.15, .04, .08, .12}, {.11, .17, .34, .22}},
        {{.23, .19, .43, .22}, {.04, .16, .05, .10}, {.20, .14, .18, .14}, {.07, .02, .09, .04}},
        {{.27, .15, .11, .47}, {.21, .10, .14, .11}, {.12, .14, .29, .11}, {.16, .19, .15, .13}},
    };
    truth.x0 = {7.09, 3.27, 5.96, 3.85};
    pf.truth = std::move(truth);
    pf.observer = ObserverSpec{Mat{{.002, .042}, {.016, .024}}, {2, 1}, {12, 8}};
    pf.switching = SwitchingSpec{42, 1.0, std::nullopt, kDefaultSteps};
    return pf;
}

std::optional<ProblemFile> bundled_fixture(std::string_view id) {
    if (id == "4.1") return continuous_example();
    if (id == "4.2") return discrete_example();
    return std::nullopt;
}

}  // namespace posobs
