from setuptools import setup, find_packages

setup(
    name='mpps',
    version='0.1.0',
    packages=find_packages(exclude=['tests']),
    py_modules=['cli'],
    include_package_data=True,
    install_requires=[
        'numpy',
        'scipy',
        'click',
        'python-dotenv',
    ],
    extras_require={
        'test': ['pytest', 'hypothesis'],
    },
    entry_points={
        'console_scripts': [
            'mpps = cli:cli',
        ],
    },
)
