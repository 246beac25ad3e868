vars s, u;
init s = 0 && u = 0;
next (s' = s + 1 && s < 2 && u' = u) || (s' = s && u' = s) || (s >= 2 && s' = 0 && u' = u);
