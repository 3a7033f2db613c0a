#pragma once

#include "bankml/dataset.hpp"
#include "bankml/errors.hpp"
#include "bankml/eval.hpp"
#include "bankml/forest.hpp"
#include "bankml/linalg.hpp"
#include "bankml/logistic.hpp"
#include "bankml/model_io.hpp"
#include "bankml/models.hpp"
#include "bankml/parallel.hpp"
#include "bankml/rng.hpp"
#include "bankml/smote.hpp"
#include "bankml/standardize.hpp"
#include "bankml/svm.hpp"
#include "bankml/synth.hpp"
#include "bankml/trend.hpp"
