from setuptools import find_packages, setup

REQUIRES = [
    "numpy>=1.18",
    "scipy>=1.6",
    "pyparsing>=3.1",
    "matplotlib>=3.1.1",
    "myst_parser>=0.15.0"
]

setup(
    name='metsheafpy',
    keywords="metsheafpy",
    packages=find_packages(exclude=['metsheafpy.tests']),
    version='0.1.0',
    description="Forcing for continuous logic over sheaves of metric structures, with projective and wave packet fibers",
    install_requires = REQUIRES,
    extras_require = {
        'test': ["pytest>=7.0", "hypothesis>=6.0"]
    },
    author='COMP0223 Group 12',
    include_package_data = True,
    entry_points = {
        'console_scripts': [
            'sheaf_force = metsheafpy.sheaf_force:main',
            'sheaf_propagator = metsheafpy.sheaf_propagator:main',
            'sheaf_gmt = metsheafpy.sheaf_gmt:main',
            'sheaf_delta = metsheafpy.sheaf_delta:main'
        ]
    },
)
