#!/usr/bin/env python

from cyber0.sim import cyber0_app

__doc__ = cyber0_app.__doc__

if __name__ == '__main__':
  cyber0_app.Cyber0App.BuildAndRun()
