# coding: utf-8
pyliouville_version = '0.1.0'
