from setuptools import setup, find_namespace_packages
import os

VERSION = '2026.10'
CURRENT_DIR = os.path.abspath(os.path.dirname(__file__))
MODULE_NAME = "rewind"
PACKAGE_NAME = "rewind"

setup(
    name=PACKAGE_NAME,
    version=VERSION,
    url="",
    download_url="",
    description='in-process isolation domains that rewind on memory-safety violations',
    tests_require=['pytest', 'pytest-cov', 'pytest-mock'],
    install_requires=['loguru', 'numpy', 'fire', 'colorama'],

    license='Apache 2.0',
    packages=find_namespace_packages(
        include=[MODULE_NAME, f"{MODULE_NAME}.*"],
        exclude=["tests", "docs"]),
    py_modules=[],
    entry_points={
        "console_scripts":  [
            "rewind = rewind.cli.main:main",
            "rewind-calc = rewind.cli.calc:main",
            "rewind-bench = rewind.cli.bench:main",
            "rewind-demo = rewind.cli.demo:main",
            "rewind-kv = rewind.cli.serve:main"
        ]
    },
    include_package_data=True,
    platforms='linux',
    classifiers=['Programming Language :: Python',
                 'Programming Language :: Python :: 3.8',
                 'Development Status :: 4 - Beta',
                 'Natural Language :: English',
                 'Intended Audience :: Developers',
                 'License :: OSI Approved :: Apache Software License',
                 'Operating System :: POSIX :: Linux',
                 ('Topic :: Software Development :: Libraries '
                  ':: Python Modules'),
                 'Topic :: System :: Recovery Tools'
                 ],
    python_requires=">=3.8",
    setup_requires=[
        'setuptools',
        'wheel',
    ],
    extras_require={
        'testing': ['pytest', 'pytest-cov', 'pytest-mock'],
    }
)
