#include "bargainlab/control_function.hpp"

#include "bargainlab/errors.hpp"
#include "bargainlab/ols.hpp"

namespace bargainlab::aux {

ControlFunctionFit fit_control_function(const Dataset& d, const ControlFunctionSpec& spec) {
    const auto rows = all_rows(d);
    std::vector<std::string> cols{spec.iv};
    cols.insert(cols.end(), spec.covariates.begin(), spec.covariates.end());
    std::vector<std::string> names;
    const Eigen::MatrixXd base = design_matrix(d, cols, rows, true, &names);

    // Insert the squared instrument after the linear term.
    Eigen::MatrixXd X(base.rows(), base.cols() + 1);
    X.col(0) = base.col(0);
    X.col(1) = base.col(1);
    X.col(2) = base.col(1).cwiseProduct(base.col(1));
    X.rightCols(base.cols() - 2) = base.rightCols(base.cols() - 2);
    std::vector<std::string> full_names{names[0], names[1], spec.iv + "_sq"};
    full_names.insert(full_names.end(), names.begin() + 2, names.end());

    const Eigen::VectorXd y = d.column(spec.outcome);
    ControlFunctionFit out;
    out.regression = stats::ols_fit(X, y, full_names);
    out.residuals = y - X * out.regression.coef;
    return out;
}

} // namespace bargainlab::aux
