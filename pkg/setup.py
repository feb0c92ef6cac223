import setuptools

required = [
    "numpy>=1.22",
    "pandas>=1.5",
    "scipy>=1.4",
    "statsmodels>=0.10",
    "joblib>=0.14",
]

extras = {
    'additional': [
        'psutil',
        'matplotlib>=3.1',
    ]
}

with open("README.md", "r") as fh:
    long_description = fh.read()

setuptools.setup(
    name="hetr",
    version="0.1.0",
    author="hetr developers",
    description="Epidemic trajectories under a random reproductive number",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=setuptools.find_packages(exclude=["tests", "tests.*"]),
    license="MIT",
    include_package_data=True,
    install_requires=required,
    extras_require=extras,
    entry_points={
        'console_scripts': ['hetr=hetr.cli:main'],
    },
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
    python_requires='>=3.7',
)
