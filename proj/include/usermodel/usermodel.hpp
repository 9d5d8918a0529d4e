#pragma once

#include "usermodel/analytic_focus.hpp"
#include "usermodel/bias_metrics.hpp"
#include "usermodel/commands.hpp"
#include "usermodel/competing_models.hpp"
#include "usermodel/config.hpp"
#include "usermodel/core.hpp"
#include "usermodel/csv.hpp"
#include "usermodel/ensemble.hpp"
#include "usermodel/evaluation.hpp"
#include "usermodel/hmm.hpp"
#include "usermodel/io.hpp"
#include "usermodel/knn.hpp"
#include "usermodel/naive_bayes.hpp"
#include "usermodel/preprocess.hpp"
#include "usermodel/registry.hpp"
#include "usermodel/stats.hpp"
#include "usermodel/synthetic.hpp"
#include "usermodel/validate.hpp"
