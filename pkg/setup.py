from codecs import open as codecs_open
from setuptools import setup
import os


# Get the long description from the relevant file
with codecs_open('README.md', encoding='utf-8') as f:
    long_description = f.read()

# After exec'ing this file we have pyliouville_version defined.
pyliouville_version = None  # Keep PEP8 happy.
version_file = os.path.join("pyliouville", "_version.py")
with open(version_file) as f:
    exec(f.read())

setup(name='pyliouville',
      version=pyliouville_version,
      description=u"Schrodinger equations and uniqueness classes on weighted graphs.",
      long_description=long_description,
      long_description_content_type="text/markdown",
      classifiers=[],
      keywords=['graph Laplacian', 'Schrodinger operator', 'intrinsic metric'],
      license='MIT',
      packages=['pyliouville'],
      include_package_data=True,
      zip_safe=False,
      python_requires='>=3.8',
      install_requires=[
          'attrs',
          'numpy',
          'scipy>=1.12'],
      extras_require={
          'dev': ['pytest'],
      },
      entry_points={
          'console_scripts': [
              'pyliouville=pyliouville.cli:main',
          ],
      },
      setup_requires=[],
      )
