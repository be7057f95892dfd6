from setuptools import find_packages, setup

requirements = [
    "pydantic",
    "lark",
    "networkx",
    "tqdm",
]

extras_require = {
    'test': ['pytest'],
}

setup(
    name='cac-check',
    packages=find_packages(exclude=["tests"]),
    package_data={"cacheck": ["corpus/*.cac"]},
    version='0.0.1',
    readme="README.md",
    description="cac-check: type checking and strong normalization conditions for the calculus of algebraic constructions.",
    long_description=open("README.md", encoding="utf-8").read(),
    long_description_content_type="text/markdown",
    license="Apache-2.0",
    python_requires=">=3.10",
    install_requires=requirements,
    extras_require=extras_require,
    entry_points={
        "console_scripts": [
            "cac=cacheck.main:cli",
        ],
    },
)
