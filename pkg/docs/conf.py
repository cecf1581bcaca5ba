# -*- coding: utf-8 -*-
#
# Configuration file for the Sphinx documentation builder.

import os
import sys
sys.path.insert(0, os.path.abspath('..'))


# -- Project information -----------------------------------------------------

project = 'pyliouville'
copyright = '2026, pyliouville developers'
author = 'pyliouville developers'

# After exec'ing this file we have pyliouville_version defined.
with open(os.path.abspath('../pyliouville/_version.py')) as f:
    exec(f.read())
# The full version, including alpha/beta/rc tags
release = pyliouville_version
# The short X.Y version
version = '.'.join(release.split('.')[:2])


# -- General configuration ---------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.doctest',
    'sphinx.ext.intersphinx',
    'sphinx.ext.viewcode',
    'sphinx.ext.mathjax',
]

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'
language = None
exclude_patterns = ['_build', 'Thumbs.db', '.DS_Store']
pygments_style = None


# -- Options for HTML output -------------------------------------------------

html_theme = 'sphinx_rtd_theme'
html_static_path = ['_static']
htmlhelp_basename = 'pyliouvilledoc'


# -- Options for other output ------------------------------------------------

latex_documents = [
    (master_doc, 'pyliouville.tex', 'pyliouville Documentation',
     'pyliouville developers', 'manual'),
]

man_pages = [
    (master_doc, 'pyliouville', 'pyliouville Documentation',
     [author], 1)
]


# -- Extension configuration -------------------------------------------------

intersphinx_mapping = {
        'python': ('https://docs.python.org/3', None),
        'numpy': ('https://numpy.org/doc/stable', None),
        'scipy': ('https://docs.scipy.org/doc/scipy', None),
    }
