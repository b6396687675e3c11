from setuptools import setup, find_packages

setup(
    name="waveguide-qed-bound-states",
    version="1.0.0",
    packages=find_packages(exclude=["examples", "examples.*"]),
    install_requires=[
        "Django>=4.2.7",
        "djangorestframework>=3.14.0",
        "pandas>=2.1.1",
        "scikit-learn>=1.3.2",
        "numpy>=1.26.1",
        "scipy>=1.11.3",
        "joblib>=1.3.2",
        "python-dotenv>=1.0.0",
    ],
    entry_points={
        "console_scripts": [
            "wqed=cli.main:main",
        ],
    },
    description="Bound states, resolvent poles and entanglement of two emitters in a 1D waveguide",
    keywords="waveguide QED, bound states in the continuum, resolvent, concurrence",
    python_requires=">=3.9",
)
