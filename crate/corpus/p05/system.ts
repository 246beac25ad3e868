vars s, u;
init s >= 0 && u = 0;
next s' = s && ((u < s && u' = u + 1) || (u > s && u' = u - 1) || (u = s && u' = u));
