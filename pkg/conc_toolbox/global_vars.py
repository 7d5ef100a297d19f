import json
from pathlib import Path

file_location = Path(__file__).parents[0]


def load_json(file_name, directory=file_location):
    """
    Load a JSON configuration file shipped with the package.
    Params:
        file_name -- Name of the file, relative to 'directory'.
        directory -- Folder holding the file (package root by default).
    Returns:
        Parsed JSON document.
    """
    file_path = Path(directory).joinpath(file_name)
    if not file_path.exists():
        raise FileNotFoundError(f"{file_path} not found.")
    with open(file_path, "rb") as f:
        return json.load(f)


defaults = load_json("defaults.json")


class tolerances:
    bisection_rtol = defaults["tolerances"]["bisection_rtol"]
    series_precision = defaults["tolerances"]["series_precision"]
    bracket_doublings = defaults["tolerances"]["bracket_doublings"]
    golden_xtol = defaults["tolerances"]["golden_xtol"]
    chernoff_grid = defaults["tolerances"]["chernoff_grid"]
    power_iteration_tol = defaults["tolerances"]["power_iteration_tol"]
    power_iteration_max_iter = defaults["tolerances"]["power_iteration_max_iter"]
    eigen_tol = defaults["tolerances"]["eigen_tol"]
    quad_dps = defaults["tolerances"]["quad_dps"]


class simulation:
    seed = defaults["simulation"]["seed"]
    binomial_level = defaults["simulation"]["binomial_level"]
    min_replications = defaults["simulation"]["min_replications"]
    block_size = defaults["simulation"]["block_size"]
    norm_samples = defaults["simulation"]["norm_samples"]
    expectation_se_slack = defaults["simulation"]["expectation_se_slack"]


class solvers:
    lasso_tol = defaults["solvers"]["lasso_tol"]
    lasso_max_iter = defaults["solvers"]["lasso_max_iter"]
    poisson_tol = defaults["solvers"]["poisson_tol"]
    poisson_max_iter = defaults["solvers"]["poisson_max_iter"]
    armijo = defaults["solvers"]["armijo"]
    fixed_point_damping = defaults["solvers"]["fixed_point_damping"]
    fixed_point_tol = defaults["solvers"]["fixed_point_tol"]
    fixed_point_max_iter = defaults["solvers"]["fixed_point_max_iter"]
