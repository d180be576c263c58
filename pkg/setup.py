from setuptools import setup, find_packages

setup(
    name="uvgroup-workbench",
    version="1.0.0",
    description="Ultraviolet-group renormalization workbench for finite causal sets",
    packages=find_packages(where="src"),
    package_dir={"": "src"},
    py_modules=[
        "anomaly", "causal", "cli", "expressions", "fields", "model_file", "models",
        "operators", "oracles", "orchestrator", "reporting", "sampling", "scalars",
        "session", "suites", "uvgroup", "wick",
    ],
    install_requires=[
        "pyyaml>=6.0",
        "sympy>=1.12",
        "networkx>=3.0",
    ],
    entry_points={
        "console_scripts": [
            "renorm=cli:main",
        ],
    },
    python_requires=">=3.10",
)
