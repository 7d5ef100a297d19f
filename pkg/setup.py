from setuptools import setup

setup(
    name="conc_toolbox",
    version="0.0.0",
    packages=[
        "conc_toolbox",
        "conc_toolbox.utils",
        "conc_toolbox.bounds",
        "conc_toolbox.matrix",
        "conc_toolbox.verification",
        "conc_toolbox.hdreg",
    ],
    url="",
    license="",
    author="",
    author_email="",
    description="Concentration inequalities with Monte-Carlo certification and sparse regression studies",
    setup_requires=["wheel"],
    include_package_data=True,
    package_data={"conc_toolbox": ["defaults.json", "bounds/catalog.json"]},
    install_requires=[
        "statsmodels",
        "toolz",
        "mpmath",
        "pandas",
        "scipy",
        "joblib",
        "numpy",
        "scikit-learn",
        "click",
    ],
    entry_points={"console_scripts": ["conc-toolbox=conc_toolbox.cli:main"]},
)
